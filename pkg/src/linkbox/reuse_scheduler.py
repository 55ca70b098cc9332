"""Batch extraction that reuses a neighbouring article's clustering.

Articles whose linked-entity sets overlap form the entity-correlated graph
(ECG). A maximum spanning forest over it fixes who inherits from whom; the
forest is then processed level by level, so a node only needs its parent's
finished result.
"""

from __future__ import annotations

import heapq
import time
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Protocol, Sequence

from .kg_store import KnowledgeGraph, neighbors
from .labeler import LabeledCluster


@dataclass(frozen=True)
class EcgConfig:
    tau: float = 0.05

    def __post_init__(self):
        if not 0.0 <= self.tau < 1.0:
            raise ValueError("tau must lie in [0, 1)")


@dataclass(frozen=True)
class Ecg:
    """Directed overlap edges ``(u, v) -> J(u->v)``; ``v`` may inherit from ``u``."""

    nodes: frozenset[str]
    edges: Mapping[tuple[str, str], float]
    pruned: int = 0
    computed: int = 0

    def undirected(self) -> dict[str, dict[str, float]]:
        """Symmetric adjacency keeping the larger weight of the two directions."""
        adj: dict[str, dict[str, float]] = defaultdict(dict)
        for (u, v), w in self.edges.items():
            if w > adj[u].get(v, 0.0):
                adj[u][v] = w
                adj[v][u] = w
        return adj


def overlap_jaccard(g: KnowledgeGraph, u: str, v: str) -> float:
    """``|N(u) & N(v)| / |N(v)|``; not symmetric. 0 when ``v`` has no links."""
    nu, nv = neighbors(g, u), neighbors(g, v)
    if not nv:
        return 0.0
    return len(nu & nv) / len(nv)


def degree_bound(size_u: int, size_v: int) -> float:
    """Upper bound on ``J(u->v)`` from the two neighbourhood sizes alone."""
    return min(size_u, size_v) / size_v


def build_ecg(g: KnowledgeGraph, cfg: EcgConfig = EcgConfig(), prune: bool = True) -> Ecg:
    """Keep every hyperlink ``u->v`` with ``J(u->v) > tau``.

    With ``prune`` the degree bound is checked first, so pairs that cannot
    pass never compute an intersection. ``pruned`` and ``computed`` count
    both paths.
    """
    edges: dict[tuple[str, str], float] = {}
    pruned = computed = 0
    for u in g.articles:
        nu = frozenset(g.links[u])
        for v in g.links[u]:
            nv = g.links.get(v)
            if not nv:
                continue
            if prune and degree_bound(len(nu), len(nv)) <= cfg.tau:
                pruned += 1
                continue
            computed += 1
            j = len(nu.intersection(nv)) / len(nv)
            if j > cfg.tau:
                edges[(u, v)] = j
    nodes = frozenset(n for e in edges for n in e)
    return Ecg(nodes, edges, pruned, computed)


@dataclass(frozen=True)
class InheritanceTree:
    root: str
    parent: Mapping[str, str]
    level: Mapping[str, int]
    order: tuple[str, ...]
    weight: float


@dataclass(frozen=True)
class InheritanceForest:
    trees: tuple[InheritanceTree, ...]

    @property
    def weight(self) -> float:
        return sum(t.weight for t in self.trees)

    @property
    def parent(self) -> dict[str, str]:
        return {c: p for t in self.trees for c, p in t.parent.items()}

    @property
    def level(self) -> dict[str, int]:
        return {n: d for t in self.trees for n, d in t.level.items()}


def prim_max_spanning(ecg: Ecg) -> InheritanceForest:
    """Maximum spanning forest, one Prim run per connected component.

    Each component is rooted at its node of highest ECG degree (ties by id)
    and grown by the heaviest edge leaving the visited set (ties by child
    id, then parent id).
    """
    adj = ecg.undirected()
    remaining = set(ecg.nodes)
    trees = []
    while remaining:
        root = min(remaining, key=lambda n: (-len(adj[n]), n))
        parent: dict[str, str] = {}
        level = {root: 0}
        order = [root]
        weight = 0.0
        heap = [(-w, v, root) for v, w in adj[root].items()]
        heapq.heapify(heap)
        while heap:
            negw, v, u = heapq.heappop(heap)
            if v in level:
                continue
            parent[v] = u
            level[v] = level[u] + 1
            order.append(v)
            weight += -negw
            for x, w in adj[v].items():
                if x not in level:
                    heapq.heappush(heap, (-w, x, v))
        remaining -= level.keys()
        trees.append(InheritanceTree(root, parent, level, tuple(order), weight))
    return InheritanceForest(tuple(trees))


def bio_weight_bruteforce(ecg: Ecg, max_nodes: int = 10) -> float:
    """Best inheritance order: heaviest Hamilton path over all nodes.

    Missing edges contribute 0. Exact search over subsets, so only small
    graphs are accepted.
    """
    nodes = sorted(ecg.nodes)
    n = len(nodes)
    if n > max_nodes:
        raise ValueError(f"{n} nodes exceeds the exhaustive-search limit of {max_nodes}")
    if n <= 1:
        return 0.0
    adj = ecg.undirected()
    w = [[adj[a].get(b, 0.0) for b in nodes] for a in nodes]
    NEG = float("-inf")
    best = [[NEG] * n for _ in range(1 << n)]
    for i in range(n):
        best[1 << i][i] = 0.0
    for mask in range(1, 1 << n):
        row = best[mask]
        for last in range(n):
            cur = row[last]
            if cur == NEG:
                continue
            for nxt in range(n):
                if mask & (1 << nxt):
                    continue
                cand = cur + w[last][nxt]
                if cand > best[mask | (1 << nxt)][nxt]:
                    best[mask | (1 << nxt)][nxt] = cand
    return max(best[(1 << n) - 1])


# -- inheritance -------------------------------------------------------------


class Deps(Protocol):
    def clusterable(self, article: str) -> tuple[str, ...]: ...

    def cluster_and_label(self, article: str, entities: Sequence[str]) -> list[LabeledCluster]: ...

    def restrict(self, labeled: LabeledCluster, members: Sequence[str]) -> LabeledCluster: ...


@dataclass(frozen=True)
class ArticleResult:
    article: str
    labeled_clusters: tuple[LabeledCluster, ...]
    inherited: int = 0
    fresh: int = 0

    def members(self) -> set[str]:
        return {m for lc in self.labeled_clusters for m in lc.members}


def direct_result(article: str, deps: Deps) -> ArticleResult:
    entities = deps.clusterable(article)
    clusters = deps.cluster_and_label(article, entities) if entities else []
    return ArticleResult(article, tuple(clusters), 0, len(entities))


def inherit_and_cluster(parent: ArticleResult | None, child: str, deps: Deps) -> ArticleResult:
    """Reuse ``parent``'s clusters for the shared entities, cluster the rest,
    then merge clusters of the two groups that carry the same label."""
    if parent is None:
        return direct_result(child, deps)
    todo = deps.clusterable(child)
    wanted = set(todo)
    r1: list[LabeledCluster] = []
    covered: set[str] = set()
    for lc in parent.labeled_clusters:
        keep = [m for m in lc.members if m in wanted]
        if keep:
            r1.append(deps.restrict(lc, keep))
            covered.update(keep)
    rest = [e for e in todo if e not in covered]
    r2 = deps.cluster_and_label(child, rest) if rest else []

    r2_labels = {lc.label for lc in r2}
    r1_labels = {lc.label for lc in r1}
    shared = r1_labels & r2_labels
    out: list[LabeledCluster] = []
    merged: dict[str, list[str]] = {}
    base: dict[str, LabeledCluster] = {}
    for lc in r1 + r2:
        if lc.label in shared:
            if lc.label not in merged:
                merged[lc.label] = []
                base[lc.label] = lc
                out.append(lc)
            merged[lc.label].extend(lc.members)
        else:
            out.append(lc)
    out = [deps.restrict(base[lc.label], merged[lc.label]) if lc.label in shared else lc for lc in out]
    return ArticleResult(child, tuple(out), len(covered), len(rest))


# -- batch -------------------------------------------------------------------


@dataclass(frozen=True)
class NodeStat:
    article: str
    level: int | None
    mode: str
    seconds: float
    inherited: int
    fresh: int
    direct_seconds: float | None = None

    @property
    def reuse_ratio(self) -> float | None:
        if self.direct_seconds is None or self.direct_seconds <= 0:
            return None
        return (self.direct_seconds - self.seconds) / self.direct_seconds


@dataclass
class BatchResult:
    results: dict[str, ArticleResult]
    stats: list[NodeStat] = field(default_factory=list)
    peak_retained: int = 0
    level_sizes: list[int] = field(default_factory=list)
    forest: InheritanceForest | None = None
    ecg: Ecg | None = None

    def stats_csv(self) -> str:
        rows = ["article,level,mode,seconds,inherited,fresh,direct_seconds,reuse_ratio"]
        for s in self.stats:
            ratio = s.reuse_ratio
            rows.append(
                f"{s.article},{'' if s.level is None else s.level},{s.mode},{s.seconds:.6f},"
                f"{s.inherited},{s.fresh},{'' if s.direct_seconds is None else f'{s.direct_seconds:.6f}'},"
                f"{'' if ratio is None else f'{ratio:.6f}'}"
            )
        return "\n".join(rows) + "\n"


def batch_extract(
    g: KnowledgeGraph,
    deps: Deps,
    cfg: EcgConfig = EcgConfig(),
    reuse: bool = True,
    measure_direct: bool = False,
) -> BatchResult:
    """Cluster and label every article.

    With ``reuse`` the forest is walked level by level across all trees;
    roots are clustered directly, other nodes inherit from their parent.
    A level's results are dropped from the working set once the next level
    is done. Articles outside the forest are clustered directly.
    """
    out = BatchResult({})

    def timed(fn, *args):
        t0 = time.perf_counter()
        res = fn(*args)
        return res, time.perf_counter() - t0

    forest_levels: dict[int, list[str]] = defaultdict(list)
    parent: dict[str, str] = {}
    if reuse:
        out.ecg = build_ecg(g, cfg)
        out.forest = prim_max_spanning(out.ecg)
        parent = out.forest.parent
        for node, h in out.forest.level.items():
            forest_levels[h].append(node)

    prev: dict[str, ArticleResult] = {}
    for h in sorted(forest_levels):
        cur: dict[str, ArticleResult] = {}
        nodes = sorted(forest_levels[h])
        out.level_sizes.append(len(nodes))
        for node in nodes:
            if h == 0:
                res, secs = timed(direct_result, node, deps)
                mode = "direct"
            else:
                res, secs = timed(inherit_and_cluster, prev[parent[node]], node, deps)
                mode = "inherit"
            direct_secs = None
            if measure_direct:
                direct_secs = secs if h == 0 else timed(direct_result, node, deps)[1]
            cur[node] = res
            out.peak_retained = max(out.peak_retained, len(prev) + len(cur))
            out.stats.append(NodeStat(node, h, mode, secs, res.inherited, res.fresh, direct_secs))
        out.results.update(cur)
        prev = cur

    for a in g.articles:
        if a in out.results:
            continue
        res, secs = timed(direct_result, a, deps)
        out.results[a] = res
        out.stats.append(NodeStat(a, None, "direct", secs, 0, res.fresh, secs if measure_direct else None))
    return out
