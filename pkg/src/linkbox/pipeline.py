"""End-to-end run: load, extract every article, emit facts and an evaluation report."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .config import PipelineConfig
from .extractor import Extractor
from .kg_store import KnowledgeGraph, read_records
from .metrics import closeness, m_at_k, precision_pcl, valid_index
from .reuse_scheduler import ArticleResult, BatchResult, batch_extract


def cluster_ids(results: Mapping[str, ArticleResult]) -> dict[str, tuple[str, ...]]:
    """``article#i`` -> members, numbering clusters in result order."""
    return {
        f"{a}#{i}": lc.members
        for a in sorted(results)
        for i, lc in enumerate(results[a].labeled_clusters)
    }


def facts_from(results: Mapping[str, ArticleResult]) -> list[dict]:
    facts = [
        {"article": a, "property": lc.label, "values": sorted(lc.members)}
        for a, res in results.items()
        for lc in res.labeled_clusters
    ]
    facts.sort(key=lambda f: (f["article"], f["property"], f["values"]))
    return facts


def render_facts(facts: Iterable[dict]) -> str:
    return "".join(json.dumps(f, ensure_ascii=False) + "\n" for f in facts)


def normalize_facts(facts: Iterable[dict]) -> dict[str, dict[str, frozenset[str]]]:
    """Article -> label -> members, merging clusters that share a label."""
    out: dict[str, dict[str, set[str]]] = {}
    for f in facts:
        out.setdefault(f["article"], {}).setdefault(f["property"], set()).update(f["values"])
    return {a: {p: frozenset(v) for p, v in props.items()} for a, props in out.items()}


def triples(facts: Iterable[dict]) -> set[tuple[str, str, str]]:
    """Flatten facts into ``(article, property, entity)`` triples."""
    return {(f["article"], f["property"], e) for f in facts for e in f["values"]}


@dataclass
class EvalReport:
    inter: float | None = None
    intra: float | None = None
    valid: float | None = None
    m_at_k: dict[int, float] = field(default_factory=dict)
    closeness: float | None = None
    precision: float | None = None
    articles: int = 0
    clusters: int = 0
    facts: int = 0

    def to_json(self) -> str:
        data = asdict(self)
        if data["valid"] is not None and math.isinf(data["valid"]):
            data["valid"] = "inf"
        data["m_at_k"] = {str(k): v for k, v in sorted(self.m_at_k.items())}
        return json.dumps(data, indent=2, sort_keys=True)


@dataclass
class PipelineResult:
    facts: list[dict]
    report: EvalReport
    batch: BatchResult
    extractor: Extractor


def load_truth(source) -> dict[str, dict[str, bool]]:
    """``article<TAB>entity<TAB>related|unrelated`` -> article -> entity -> related."""
    truth: dict[str, dict[str, bool]] = {}
    for _, (a, e, flag) in read_records(source, 3):
        if flag not in ("related", "unrelated"):
            raise ValueError(f"relatedness flag must be related|unrelated, got {flag!r}")
        truth.setdefault(a, {})[e] = flag == "related"
    return truth


def load_judgments(source) -> dict[tuple[str, str], bool]:
    """``cluster_id<TAB>entity<TAB>0|1``."""
    out = {}
    for _, (cid, e, flag) in read_records(source, 3):
        if flag not in ("0", "1"):
            raise ValueError(f"judgment must be 0 or 1, got {flag!r}")
        out[(cid, e)] = flag == "1"
    return out


def _mean(values: list[float]) -> float | None:
    return sum(values) / len(values) if values else None


def evaluate(
    ex: Extractor,
    results: Mapping[str, ArticleResult],
    truth: Mapping[str, Mapping[str, bool]] | None = None,
    judgments: Mapping[tuple[str, str], bool] | None = None,
) -> EvalReport:
    rep = EvalReport(articles=len(results), clusters=sum(len(r.labeled_clusters) for r in results.values()))
    inter, intra, valid = [], [], []
    for a in sorted(results):
        lcs = results[a].labeled_clusters
        if len(lcs) < 2:
            continue
        vi = valid_index([lc.cluster for lc in lcs], {m: ex.vector(m) for lc in lcs for m in lc.members})
        inter.append(vi.inter)
        intra.append(vi.intra)
        valid.append(vi.valid)
    rep.inter, rep.intra = _mean(inter), _mean(intra)
    finite = [v for v in valid if math.isfinite(v)]
    rep.valid = _mean(finite) if finite else (math.inf if valid else None)

    if truth:
        curves: dict[int, list[float]] = {}
        close = []
        for a in sorted(truth):
            related = {e for e, ok in truth[a].items() if ok}
            if a not in ex.g.links or not related:
                continue
            order = ex.filter(a).ordering().order()
            related &= set(order)
            if not related:
                continue
            for k in range(1, len(order) + 1):
                curves.setdefault(k, []).append(m_at_k(order, related, k))
            close.append(closeness(order, related, 1, len(order)))
        rep.m_at_k = {k: sum(v) / len(v) for k, v in curves.items()}
        rep.closeness = _mean(close)

    if judgments is not None:
        ids = cluster_ids(results)
        if ids:
            rep.precision = precision_pcl(ids, judgments)
    return rep


def run_pipeline(
    cfg: PipelineConfig,
    g: KnowledgeGraph,
    truth: Mapping[str, Mapping[str, bool]] | None = None,
    judgments: Mapping[tuple[str, str], bool] | None = None,
    measure_direct: bool = False,
) -> PipelineResult:
    ex = Extractor(g, cfg)
    batch = batch_extract(g, ex, cfg.ecg, reuse=cfg.reuse, measure_direct=measure_direct)
    facts = facts_from(batch.results)
    report = evaluate(ex, batch.results, truth, judgments)
    report.facts = len(facts)
    return PipelineResult(facts, report, batch, ex)


def write_facts(facts: Iterable[dict], path: str | Path) -> None:
    Path(path).write_text(render_facts(facts), encoding="utf-8")
