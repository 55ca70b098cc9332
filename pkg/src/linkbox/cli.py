"""Command-line entry point ``linkbox``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import PipelineConfig
from .errors import LinkboxError
from .extractor import Extractor
from .kg_store import load_graph_dir, write_graph_dir
from .metrics import overlap_distributions
from .pipeline import cluster_ids, load_judgments, load_truth, render_facts, run_pipeline
from .relatedness import noise_distribution
from .reuse_scheduler import direct_result
from .taxonomy import build_isa

log = logging.getLogger("linkbox")


def _emit(rows) -> None:
    for row in rows:
        sys.stdout.write(json.dumps(row, ensure_ascii=False) + "\n")


def _config(args) -> PipelineConfig:
    cfg = PipelineConfig.load(args.config) if args.config else PipelineConfig()
    overrides: dict[str, dict] = {}

    def put(section, key, value):
        if value is not None:
            overrides.setdefault(section, {})[key] = value

    put("aggregation", "beta", getattr(args, "beta", None))
    put("aggregation", "threshold", getattr(args, "threshold", None))
    put("taxonomy", "alpha_edge", getattr(args, "alpha_edge", None))
    if getattr(args, "max_depth", None) is not None:
        put("taxonomy", "max_depth", None if args.max_depth.lower() == "none" else int(args.max_depth))
    put("cluster", "rng_seed", getattr(args, "seed", None))
    put("cluster", "significance", getattr(args, "significance", None))
    put("cluster", "max_iter", getattr(args, "max_iter", None))
    put("label", "strategy", getattr(args, "strategy", None))
    put("label", "zeta", getattr(args, "zeta", None))
    put("label", "max_level", getattr(args, "max_level", None))
    put("ecg", "tau", getattr(args, "tau", None))
    put("relatedness", "sr_threshold", getattr(args, "sr_threshold", None))
    reuse = getattr(args, "reuse", None)
    if reuse is not None:
        overrides["reuse"] = reuse == "on"
    return cfg.replace(**overrides)


def cmd_ingest(args, g, cfg) -> int:
    if args.out:
        write_graph_dir(g, args.out)
    summary = {
        "entities": len(g.entities),
        "categories": len(g.category_nodes),
        "articles": len(g.articles),
        "links": sum(len(v) for v in g.links.values()),
    }
    print(json.dumps(summary, sort_keys=True))
    return 0


def _targets(args, g) -> list[str]:
    return [args.article] if getattr(args, "article", None) else g.articles


def cmd_filter(args, g, cfg) -> int:
    ex = Extractor(g, cfg)
    rows = []
    for a in _targets(args, g):
        res = ex.filter(a)
        rows.append({"article": a, "related": list(res.related), "noise": list(res.noise), "scores": dict(res.scores)})
    _emit(rows)
    return 0


def cmd_taxonomy(args, g, cfg) -> int:
    ex = Extractor(g, cfg)
    tax = build_isa(g, args.entity, cfg.taxonomy)
    out = tax.to_json()
    out["features"] = ex.vector(args.entity).to_json()
    print(json.dumps(out, sort_keys=True))
    return 0


def cmd_cluster(args, g, cfg) -> int:
    ex = Extractor(g, cfg)
    clusters = ex.cluster(args.article, ex.clusterable(args.article))
    _emit(
        {"cluster_id": f"{args.article}#{i}", "members": sorted(c.members), "centroid": c.centroid.to_json()}
        for i, c in enumerate(clusters)
    )
    return 0


def cmd_label(args, g, cfg) -> int:
    ex = Extractor(g, cfg)
    rows = []
    for a in _targets(args, g):
        res = direct_result(a, ex)
        rows.extend(
            {
                "cluster_id": f"{a}#{i}",
                "label": lc.label,
                "coverage": lc.coverage,
                "strategy": lc.strategy,
                "members": sorted(lc.members),
            }
            for i, lc in enumerate(res.labeled_clusters)
        )
    _emit(rows)
    return 0


def cmd_extract(args, g, cfg) -> int:
    run = run_pipeline(cfg, g, measure_direct=bool(args.stats))
    facts = run.facts
    if args.article:
        facts = [f for f in facts if f["article"] == args.article]
    text = render_facts(facts)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.stats:
        Path(args.stats).write_text(run.batch.stats_csv(), encoding="utf-8")
    log.info("%d facts from %d articles", len(facts), len(run.batch.results))
    return 0


def cmd_eval(args, g, cfg) -> int:
    truth = load_truth(args.truth) if args.truth else None
    judgments = load_judgments(args.judgments) if args.judgments else None
    run = run_pipeline(cfg, g, truth=truth, judgments=judgments)
    if args.clusters_out:
        rows = "".join(
            f"{cid}\t{m}\n" for cid, members in cluster_ids(run.batch.results).items() for m in members
        )
        Path(args.clusters_out).write_text(rows, encoding="utf-8")
    print(run.report.to_json())
    return 0


def cmd_stats(args, g, cfg) -> int:
    hist = noise_distribution(g, cfg.relatedness.sr_threshold, args.bins)
    ov = overlap_distributions(g, args.bins, args.max_k)
    out = {
        "noise_histogram": [[lo, hi, c] for lo, hi, c in hist.bins],
        "noise_cumulative": hist.cumulative(),
        "max_overlap_cdf": ov.cdf,
        "k_hop_overlap": {str(k): v for k, v in ov.k_hop.items()},
    }
    print(json.dumps(out, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="linkbox", description="Infobox-style facts from an entity link graph.")
    p.add_argument("--data", required=True, help="directory with entities.tsv, links.tsv, categories.tsv")
    p.add_argument("--config", help="INI file with per-stage settings")
    p.add_argument(
        "--strict",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="reject dangling references (default) or drop them with a warning",
    )
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", help="validate the graph and print a summary")
    s.add_argument("--out", help="write the graph back in normal form")
    s.set_defaults(func=cmd_ingest)

    def agg_opts(s):
        s.add_argument("--beta", type=float)
        s.add_argument("--threshold", type=float)

    def tax_opts(s):
        s.add_argument("--alpha-edge", type=float)
        s.add_argument("--max-depth", help="integer or 'none' for no limit")

    def cluster_opts(s):
        s.add_argument("--seed", type=int)
        s.add_argument("--significance", type=float)
        s.add_argument("--max-iter", type=int)

    def label_opts(s):
        s.add_argument("--strategy", choices=("mf", "mfi", "zlca"))
        s.add_argument("--zeta", type=float)
        s.add_argument("--max-level", type=int)

    def extract_opts(s):
        agg_opts(s)
        tax_opts(s)
        cluster_opts(s)
        label_opts(s)
        s.add_argument("--tau", type=float)
        s.add_argument("--reuse", choices=("on", "off"))

    def target_opts(s):
        target = s.add_mutually_exclusive_group()
        target.add_argument("--all", action="store_true", help="every article (default)")
        target.add_argument("--article")

    s = sub.add_parser("filter", help="score an article's linked entities")
    target_opts(s)
    agg_opts(s)
    s.set_defaults(func=cmd_filter)

    s = sub.add_parser("taxonomy", help="print an entity's IsA taxonomy and features")
    s.add_argument("--entity", required=True)
    tax_opts(s)
    s.set_defaults(func=cmd_taxonomy)

    s = sub.add_parser("cluster", help="cluster an article's related entities")
    s.add_argument("--article", required=True)
    agg_opts(s)
    tax_opts(s)
    cluster_opts(s)
    s.set_defaults(func=cmd_cluster)

    s = sub.add_parser("label", help="cluster and label articles without reuse")
    target_opts(s)
    agg_opts(s)
    tax_opts(s)
    cluster_opts(s)
    label_opts(s)
    s.set_defaults(func=cmd_label)

    s = sub.add_parser("extract", help="extract facts for all articles")
    target_opts(s)
    s.add_argument("--out", help="facts file (JSON lines); stdout when omitted")
    s.add_argument("--stats", help="write per-article timing CSV here")
    extract_opts(s)
    s.set_defaults(func=cmd_extract)

    s = sub.add_parser("eval", help="run extraction and print the evaluation report")
    s.add_argument("--truth", help="article<TAB>entity<TAB>related|unrelated")
    s.add_argument("--judgments", help="cluster_id<TAB>entity<TAB>0|1")
    s.add_argument("--clusters-out", help="write cluster_id<TAB>entity rows for judging")
    extract_opts(s)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("stats", help="noise and overlap distributions")
    s.add_argument("--sr-threshold", type=float)
    s.add_argument("--bins", type=int, default=10)
    s.add_argument("--max-k", type=int, default=3)
    s.set_defaults(func=cmd_stats)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = _config(args)
        g = load_graph_dir(args.data, strict=args.strict)
        return args.func(args, g, cfg)
    except (LinkboxError, ValueError, OSError) as exc:
        print(f"linkbox: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
