"""Per-entity IsA taxonomies over the category layer, and category features.

An edge ``child -> parent`` is kept when the parent category's words are
frequent among the child's own categories. Each entity's taxonomy is the
part of that thresholded graph reachable from it, expanded level by level.
Feature weights are the max-product path confidence times category idf.
"""

from __future__ import annotations

import math
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Mapping

from .errors import UndefinedMeasureError, UnknownNodeError
from .kg_store import KnowledgeGraph, categories

_WORD = re.compile(r"[^\W_]+")


@lru_cache(maxsize=65536)
def tokenize(name: str) -> frozenset[str]:
    """Lowercased words of a category name, split on whitespace and punctuation."""
    return frozenset(_WORD.findall(name.lower()))


def word_score(g: KnowledgeGraph, e: str, s: str) -> float:
    """Share of ``e``'s categories whose name contains the word ``s``."""
    cats = categories(g, e)
    if not cats:
        raise UndefinedMeasureError(f"{e!r} has no categories")
    s = s.lower()
    return sum(1 for c in cats if s in tokenize(c)) / len(cats)


def category_score(g: KnowledgeGraph, e: str, c: str) -> float:
    """Mean word score of the distinct words of category ``c`` relative to ``e``."""
    words = tokenize(c)
    if not words:
        raise ValueError(f"category {c!r} has no words")
    cats = categories(g, e)
    if not cats:
        raise UndefinedMeasureError(f"{e!r} has no categories")
    freq = Counter(w for cat in cats for w in tokenize(cat))
    return sum(freq[w] for w in words) / (len(words) * len(cats))


@dataclass(frozen=True)
class TaxonomyConfig:
    alpha_edge: float = 0.2
    max_depth: int | None = 4

    def __post_init__(self):
        if not 0.0 < self.alpha_edge <= 1.0:
            raise ValueError("alpha_edge must lie in (0, 1]")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")


@dataclass(frozen=True)
class IsaGraph:
    """Thresholded hypernym edges over the whole graph, made acyclic."""

    parents: Mapping[str, tuple[tuple[str, float], ...]]
    dropped: tuple[tuple[str, str], ...] = ()


def _remove_cycles(adj: dict[str, list[tuple[str, float]]]) -> tuple[dict, list]:
    # Iterative DFS in sorted order; edges into a node on the current stack are dropped.
    WHITE, GREY, BLACK = 0, 1, 2
    color: dict[str, int] = defaultdict(int)
    kept: dict[str, list[tuple[str, float]]] = {}
    dropped = []
    for start in sorted(adj):
        if color[start] != WHITE:
            continue
        color[start] = GREY
        stack = [(start, iter(adj.get(start, ())))]
        kept[start] = []
        while stack:
            node, it = stack[-1]
            step = next(it, None)
            if step is None:
                color[node] = BLACK
                stack.pop()
                continue
            parent, w = step
            if color[parent] == GREY:
                dropped.append((node, parent))
                continue
            kept[node].append((parent, w))
            if color[parent] == WHITE:
                color[parent] = GREY
                kept.setdefault(parent, [])
                stack.append((parent, iter(adj.get(parent, ()))))
    return kept, dropped


@lru_cache(maxsize=8)
def isa_graph(g: KnowledgeGraph, alpha_edge: float) -> IsaGraph:
    adj: dict[str, list[tuple[str, float]]] = {}
    for node in sorted(g.categories):
        edges = []
        for c in sorted(g.categories[node]):
            if not tokenize(c):
                continue
            w = category_score(g, node, c)
            if w > alpha_edge:
                edges.append((c, w))
        adj[node] = edges
    kept, dropped = _remove_cycles(adj)
    return IsaGraph({k: tuple(v) for k, v in kept.items() if v}, tuple(dropped))


@dataclass(frozen=True)
class IsaTaxonomy:
    """Weighted hypernym DAG rooted at one entity (or category)."""

    root: str
    nodes: frozenset[str]
    edges: tuple[tuple[str, str, float], ...]
    confidence: Mapping[str, float]
    depth: Mapping[str, int] = field(default_factory=dict)

    def parents(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = defaultdict(list)
        for child, parent, _ in self.edges:
            out[child].append(parent)
        return out

    def to_json(self) -> dict:
        return {
            "root": self.root,
            "edges": [[c, p, w] for c, p, w in self.edges],
            "confidence": {c: self.confidence[c] for c in sorted(self.confidence)},
        }

    @classmethod
    def from_edges(cls, root: str, edges: Iterable[tuple[str, str, float]]) -> "IsaTaxonomy":
        """Assemble a taxonomy from explicit weighted edges (must form a DAG)."""
        edges = tuple(edges)
        conf = _max_product(root, edges)
        missing = {p for _, p, _ in edges} - conf.keys()
        if missing:
            raise ValueError(f"nodes unreachable from {root!r}: {sorted(missing)}")
        depth = _bfs_depth(root, edges)
        nodes = frozenset(conf) - {root}
        return cls(root, nodes, edges, {c: conf[c] for c in nodes}, depth)


def _bfs_depth(root: str, edges) -> dict[str, int]:
    adj = defaultdict(list)
    for c, p, _ in edges:
        adj[c].append(p)
    depth, frontier = {root: 0}, [root]
    while frontier:
        nxt = []
        for node in frontier:
            for p in adj[node]:
                if p not in depth:
                    depth[p] = depth[node] + 1
                    nxt.append(p)
        frontier = nxt
    return depth


def _max_product(root: str, edges) -> dict[str, float]:
    """Max over root->node paths of the product of edge weights (Kahn order)."""
    out_adj: dict[str, list[tuple[str, float]]] = defaultdict(list)
    indeg: Counter[str] = Counter()
    nodes = {root}
    for c, p, w in edges:
        out_adj[c].append((p, w))
        indeg[p] += 1
        nodes.update((c, p))
    best = {root: 1.0}
    ready = [n for n in nodes if indeg[n] == 0]
    seen = 0
    while ready:
        node = ready.pop()
        seen += 1
        for p, w in out_adj[node]:
            if node in best:
                cand = best[node] * w
                if cand > best.get(p, -1.0):
                    best[p] = cand
            indeg[p] -= 1
            if indeg[p] == 0:
                ready.append(p)
    if seen != len(nodes):
        raise ValueError("taxonomy edges contain a cycle")
    return best


def build_isa(
    g: KnowledgeGraph, e: str, cfg: TaxonomyConfig = TaxonomyConfig()
) -> IsaTaxonomy:
    """Grow ``e``'s taxonomy level by level over the thresholded IsA graph.

    Every level adds the accepted parents of the previous level's new
    nodes; nodes already present get the extra in-edge but are not
    expanded again. Stops at ``cfg.max_depth`` levels or when nothing new
    appears.
    """
    if e not in g:
        raise UnknownNodeError(e)
    graph = isa_graph(g, cfg.alpha_edge)
    depth = {e: 0}
    frontier = [e]
    edges: list[tuple[str, str, float]] = []
    level = 0
    while frontier and (cfg.max_depth is None or level < cfg.max_depth):
        nxt = []
        for child in frontier:
            for parent, w in graph.parents.get(child, ()):
                edges.append((child, parent, w))
                if parent not in depth:
                    depth[parent] = level + 1
                    nxt.append(parent)
        frontier = nxt
        level += 1
    conf = _max_product(e, edges)
    nodes = frozenset(depth) - {e}
    return IsaTaxonomy(e, nodes, tuple(edges), {c: conf[c] for c in nodes}, depth)


def path_confidence(tax: IsaTaxonomy, c: str) -> float:
    if c not in tax.confidence:
        raise UnknownNodeError(c)
    return tax.confidence[c]


class SparseFeatureVector(Mapping[str, float]):
    """Nonnegative sparse vector keyed by category id; zeros are not stored."""

    __slots__ = ("_w",)

    def __init__(self, weights: Mapping[str, float] | Iterable[tuple[str, float]] = ()):
        items = weights.items() if isinstance(weights, Mapping) else weights
        w = {}
        for k, v in items:
            v = float(v)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"weight for {k!r} must be finite and nonnegative, got {v}")
            if v > 0:
                w[k] = v
        self._w = w

    def __getitem__(self, key: str) -> float:
        return self._w[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self._w)

    def __len__(self) -> int:
        return len(self._w)

    def __repr__(self) -> str:
        return f"SparseFeatureVector({self._w!r})"

    def get(self, key, default=0.0):
        return self._w.get(key, default)

    def dot(self, other: Mapping[str, float]) -> float:
        a, b = (self, other) if len(self) <= len(other) else (other, self)
        return sum(v * b.get(k, 0.0) for k, v in a.items())

    def norm(self) -> float:
        return math.sqrt(sum(v * v for v in self._w.values()))

    def to_json(self) -> dict[str, float]:
        return {k: self._w[k] for k in sorted(self._w)}


def cosine_distance(a: Mapping[str, float], b: Mapping[str, float]) -> float:
    """``1 - cos``; a zero vector is at distance 1 from everything."""
    ma = max((abs(v) for v in a.values()), default=0.0)
    mb = max((abs(v) for v in b.values()), default=0.0)
    if ma == 0.0 or mb == 0.0:
        return 1.0
    # rescale first so tiny weights do not underflow in the norms
    a = SparseFeatureVector({k: v / ma for k, v in a.items()})
    b = {k: v / mb for k, v in b.items()}
    na, nb = a.norm(), math.sqrt(sum(v * v for v in b.values()))
    return min(2.0, max(0.0, 1.0 - a.dot(b) / (na * nb)))


class TaxonomyCorpus:
    """The taxonomies of a set of entities, with category document frequencies."""

    def __init__(self, taxonomies: Mapping[str, IsaTaxonomy] | Iterable[IsaTaxonomy]):
        if not isinstance(taxonomies, Mapping):
            taxonomies = {t.root: t for t in taxonomies}
        self.taxonomies: dict[str, IsaTaxonomy] = dict(taxonomies)
        self.df: Counter[str] = Counter(c for t in self.taxonomies.values() for c in t.nodes)

    @classmethod
    def build(
        cls,
        g: KnowledgeGraph,
        cfg: TaxonomyConfig = TaxonomyConfig(),
        entities: Iterable[str] | None = None,
    ) -> "TaxonomyCorpus":
        ids = g.entities if entities is None else entities
        return cls({e: build_isa(g, e, cfg) for e in ids})

    def __len__(self) -> int:
        return len(self.taxonomies)

    def __contains__(self, e: object) -> bool:
        return e in self.taxonomies

    def __getitem__(self, e: str) -> IsaTaxonomy:
        return self.taxonomies[e]

    def idf(self, c: str) -> float:
        df = self.df.get(c, 0)
        if df == 0:
            return math.inf
        return math.log(len(self.taxonomies) / df)

    def feature_vector(self, e: str) -> SparseFeatureVector:
        return feature_vector(self.taxonomies[e], self)


def category_idf(corpus: TaxonomyCorpus, c: str) -> float:
    return corpus.idf(c)


def feature_vector(tax: IsaTaxonomy, corpus: TaxonomyCorpus) -> SparseFeatureVector:
    weights = {}
    for c in sorted(tax.nodes):
        idf = corpus.idf(c)
        if math.isfinite(idf):
            weights[c] = tax.confidence[c] * idf
    return SparseFeatureVector(weights)
