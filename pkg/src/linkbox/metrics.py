"""Evaluation measures for filtering, clustering and labeling."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .gmeans import Cluster
from .kg_store import KnowledgeGraph
from .labeler import LabeledCluster
from .noise_filter import Ranking
from .reuse_scheduler import overlap_jaccard
from .taxonomy import cosine_distance

# intra-cluster spread at or below this counts as zero
_ZERO = 1e-12


@dataclass(frozen=True)
class ValidIndex:
    inter: float
    intra: float
    valid: float


def valid_index(clusters: Sequence[Cluster], vectors: Mapping[str, Mapping[str, float]]) -> ValidIndex:
    """Mean pairwise centroid distance over mean member-to-centroid distance.

    ``valid`` is ``inf`` when every cluster is tight (intra of zero).
    """
    k = len(clusters)
    if k < 2:
        raise ValueError("valid index needs at least two clusters")
    if any(not c.members for c in clusters):
        raise ValueError("clusters must be nonempty")
    inter = sum(
        cosine_distance(clusters[i].centroid, clusters[j].centroid) for i in range(k) for j in range(i + 1, k)
    ) * 2.0 / (k * (k - 1))
    intra = sum(
        sum(cosine_distance(c.centroid, vectors[e]) for e in c.members) / len(c.members) for c in clusters
    ) / k
    if intra <= _ZERO:
        return ValidIndex(inter, 0.0, math.inf)
    return ValidIndex(inter, intra, inter / intra)


def _order(ordering: Ranking | Sequence[str]) -> list[str]:
    return ordering.order() if isinstance(ordering, Ranking) else list(ordering)


def m_at_k(ordering: Ranking | Sequence[str], truth: Iterable[str], k: int) -> float:
    """Share of the truly related entities found in the top ``k``."""
    truth = set(truth)
    if not truth:
        raise ValueError("ground truth is empty")
    order = _order(ordering)
    if not 0 <= k <= len(order):
        raise ValueError(f"K={k} outside 0..{len(order)}")
    return len(truth.intersection(order[:k])) / len(truth)


def ideal_curve(truth_size: int, n: int) -> dict[int, float]:
    return {k: min(k, truth_size) / truth_size for k in range(n + 1)}


def closeness(
    ordering: Ranking | Sequence[str],
    truth: Iterable[str],
    s: int,
    t: int,
    truth_curve: Mapping[int, float] | Ranking | Sequence[str] | None = None,
) -> float:
    """Mean of ``M@K(ordering) / M@K(reference)`` for ``K`` in ``[s, t]``.

    The reference defaults to the best possible curve; it may also be given
    as an ordering or as explicit ``K -> value`` pairs. Terms where the
    reference is zero are left out of both sum and count.
    """
    truth = set(truth)
    order = _order(ordering)
    n = len(order)
    if not 1 <= s <= t <= n:
        raise ValueError(f"need 1 <= s <= t <= {n}, got s={s}, t={t}")
    if truth_curve is None:
        ref = ideal_curve(len(truth), n)
    elif isinstance(truth_curve, Mapping):
        ref = truth_curve
    else:
        ref_order = _order(truth_curve)
        ref = {k: m_at_k(ref_order, truth, k) for k in range(s, t + 1)}
    total, count = 0.0, 0
    for k in range(s, t + 1):
        if ref[k] == 0:
            continue
        total += m_at_k(order, truth, k) / ref[k]
        count += 1
    if count == 0:
        raise ValueError("reference curve is zero over the whole range")
    return total / count


def precision_pcl(
    clusters: Mapping[str, LabeledCluster | Iterable[str]] | Sequence[LabeledCluster],
    judgments: Mapping[tuple[str, str], bool],
) -> float:
    """Mean over clusters of the share of members judged to fit the label.

    A sequence of clusters is keyed by position (``"0"``, ``"1"``, ...).
    """
    if not isinstance(clusters, Mapping):
        clusters = {str(i): c for i, c in enumerate(clusters)}
    if not clusters:
        raise ValueError("no clusters to score")
    members = {
        cid: list(c.members if isinstance(c, LabeledCluster) else c) for cid, c in clusters.items()
    }
    missing = [(cid, e) for cid, ms in members.items() for e in ms if (cid, e) not in judgments]
    if missing:
        shown = ", ".join(f"{cid}/{e}" for cid, e in missing[:20])
        raise KeyError(f"{len(missing)} unjudged members: {shown}")
    return sum(sum(bool(judgments[(cid, e)]) for e in ms) / len(ms) for cid, ms in members.items()) / len(
        members
    )


@dataclass(frozen=True)
class OverlapDistributions:
    max_overlap: Mapping[str, float]
    cdf: list[tuple[float, float]]
    k_hop: Mapping[int, float | None]


def overlap_distributions(g: KnowledgeGraph, bins: int = 10, max_k: int = 3) -> OverlapDistributions:
    """Per-article maximal overlap with a linked article, and mean overlap by hop.

    ``cdf`` gives, at ``x = i/bins``, the share of articles whose maximal
    overlap is at most ``x``. ``k_hop[k]`` averages ``J(seed -> v)`` over all
    articles ``v`` exactly ``k`` link hops from a seed; ``None`` when there
    is no such pair.
    """
    best = {}
    for a in g.articles:
        vals = [overlap_jaccard(g, a, v) for v in g.links[a] if v in g.links]
        best[a] = max(vals, default=0.0)
    total = len(best)
    cdf = []
    for i in range(bins + 1):
        x = i / bins
        cdf.append((x, sum(1 for v in best.values() if v <= x + 1e-12) / total if total else 0.0))

    sums = [0.0] * (max_k + 1)
    counts = [0] * (max_k + 1)
    for seed in g.articles:
        dist = {seed: 0}
        queue = deque([seed])
        while queue:
            u = queue.popleft()
            if dist[u] == max_k:
                continue
            for v in g.links.get(u, ()):
                if v not in dist:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        for v, d in dist.items():
            if d and v in g.links:
                sums[d] += overlap_jaccard(g, seed, v)
                counts[d] += 1
    k_hop = {k: (sums[k] / counts[k] if counts[k] else None) for k in range(1, max_k + 1)}
    return OverlapDistributions(best, cdf, k_hop)
