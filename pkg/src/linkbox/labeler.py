"""Property names for clusters.

Three strategies over the union of the members' IsA taxonomies:

* ``MF``   most frequent category,
* ``MFI``  most frequent weighted by category idf,
* ``ZLCA`` the most specific category covering at least a ``zeta`` share of
  the members, searched level by level upwards from the members.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

from .errors import NoLabelError, UnknownNodeError
from .gmeans import Cluster
from .taxonomy import IsaTaxonomy, SparseFeatureVector, TaxonomyCorpus

STRATEGIES = ("mf", "mfi", "zlca")
_EPS = 1e-9


@dataclass(frozen=True)
class LabelConfig:
    zeta: float = 0.8
    max_level: int = 5
    strategy: str = "zlca"

    def __post_init__(self):
        if not 0.0 < self.zeta <= 1.0:
            raise ValueError("zeta must lie in (0, 1]")
        if self.max_level < 1:
            raise ValueError("max_level must be at least 1")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")


@dataclass(frozen=True, eq=False)
class ClusterTaxonomy:
    """Unweighted union of the members' taxonomies."""

    members: tuple[str, ...]
    parents: Mapping[str, frozenset[str]]
    tf: Mapping[str, int]

    @property
    def nodes(self) -> frozenset[str]:
        return frozenset(self.tf)

    @cached_property
    def distances(self) -> dict[str, dict[str, int]]:
        """Hop distance from each member to every category above it."""
        out = {}
        for m in self.members:
            dist: dict[str, int] = {}
            queue = deque([(m, 0)])
            while queue:
                node, d = queue.popleft()
                for p in self.parents.get(node, ()):
                    if p not in dist and p != m:
                        dist[p] = d + 1
                        queue.append((p, d + 1))
            out[m] = dist
        return out

    def reach_count(self, c: str, within: int | None = None) -> int:
        """Members having ``c`` as an ancestor, optionally within ``within`` hops."""
        return sum(
            1 for d in self.distances.values() if c in d and (within is None or d[c] <= within)
        )


def union_taxonomy(taxes: Iterable[IsaTaxonomy]) -> ClusterTaxonomy:
    taxes = list(taxes)
    if not taxes:
        raise ValueError("need at least one taxonomy")
    parents: dict[str, set[str]] = {}
    for t in taxes:
        for child, parent, _ in t.edges:
            parents.setdefault(child, set()).add(parent)
    tf = Counter(c for t in taxes for c in t.nodes)
    _check_acyclic(parents)
    members = tuple(dict.fromkeys(t.root for t in taxes))
    return ClusterTaxonomy(members, {k: frozenset(v) for k, v in parents.items()}, dict(tf))


def _check_acyclic(parents: Mapping[str, Iterable[str]]) -> None:
    indeg: Counter[str] = Counter()
    nodes = set(parents)
    for ps in parents.values():
        for p in ps:
            indeg[p] += 1
            nodes.add(p)
    ready = [n for n in nodes if indeg[n] == 0]
    seen = 0
    while ready:
        n = ready.pop()
        seen += 1
        for p in parents.get(n, ()):
            indeg[p] -= 1
            if indeg[p] == 0:
                ready.append(p)
    if seen != len(nodes):
        raise ValueError("union of taxonomies contains a cycle")


def coverage(ct: ClusterTaxonomy, c: str) -> float:
    if c not in ct.tf:
        raise UnknownNodeError(c)
    return ct.reach_count(c) / len(ct.members)


def label_mf(ct: ClusterTaxonomy) -> str:
    if not ct.tf:
        raise NoLabelError("cluster taxonomy has no categories")
    return min(ct.tf, key=lambda c: (-ct.tf[c], c))


def label_mfi(ct: ClusterTaxonomy, corpus: TaxonomyCorpus) -> str:
    if not ct.tf:
        raise NoLabelError("cluster taxonomy has no categories")
    return min(ct.tf, key=lambda c: (-ct.tf[c] * corpus.idf(c), c))


@dataclass(frozen=True)
class LabeledCluster:
    cluster: Cluster
    label: str
    coverage: float
    strategy: str
    zeta: float | None = None

    @property
    def members(self) -> tuple[str, ...]:
        return self.cluster.members


def zeta_lca(ct: ClusterTaxonomy, corpus: TaxonomyCorpus, cfg: LabelConfig = LabelConfig()) -> tuple[str, float]:
    """Return ``(label, effective zeta)``.

    At level ``i`` a category is a candidate when at least ``zeta * |X|``
    members reach it within ``i`` hops. The first level with a candidate
    wins; among its candidates the highest idf is taken, then the larger
    reach, then the smaller id. If no level up to ``max_level`` has one,
    ``zeta`` drops by ``1/|X|`` (not below it) and the search restarts.
    """
    if not ct.tf:
        raise NoLabelError("cluster taxonomy has no categories")
    n = len(ct.members)
    step = 1.0 / n
    z = cfg.zeta
    cats = sorted(ct.tf)
    while True:
        need = z * n - _EPS
        for level in range(1, cfg.max_level + 1):
            counts = {c: ct.reach_count(c, level) for c in cats}
            cands = [c for c in cats if counts[c] >= need]
            if cands:
                return min(cands, key=lambda c: (-corpus.idf(c), -counts[c], c)), z
        if z <= step + _EPS:
            raise NoLabelError(f"no category within {cfg.max_level} levels of any member")
        z = max(z - step, step)


def label_zeta_lca(
    ct: ClusterTaxonomy, corpus: TaxonomyCorpus, cfg: LabelConfig = LabelConfig(), cluster: Cluster | None = None
) -> LabeledCluster:
    label, z = zeta_lca(ct, corpus, cfg)
    return LabeledCluster(_cluster_of(ct, cluster), label, coverage(ct, label), "ZLCA", z)


def _cluster_of(ct: ClusterTaxonomy, cluster: Cluster | None) -> Cluster:
    if cluster is not None:
        return cluster
    return Cluster(ct.members, SparseFeatureVector())


def label_cluster(cluster: Cluster, corpus: TaxonomyCorpus, cfg: LabelConfig = LabelConfig()) -> LabeledCluster:
    """Label ``cluster`` using the members' taxonomies from ``corpus``."""
    ct = union_taxonomy(corpus[m] for m in cluster.members)
    if cfg.strategy == "zlca":
        return label_zeta_lca(ct, corpus, cfg, cluster)
    label = label_mf(ct) if cfg.strategy == "mf" else label_mfi(ct, corpus)
    return LabeledCluster(cluster, label, coverage(ct, label), cfg.strategy.upper())


def relabel_coverage(labeled: LabeledCluster, cluster: Cluster, corpus: TaxonomyCorpus) -> LabeledCluster:
    """Keep the label of ``labeled`` on a new member set; coverage is recomputed."""
    ct = union_taxonomy(corpus[m] for m in cluster.members)
    cov = ct.reach_count(labeled.label) / len(ct.members)
    return LabeledCluster(cluster, labeled.label, cov, labeled.strategy, labeled.zeta)
