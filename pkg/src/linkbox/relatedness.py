"""Pairwise relatedness between entities: PMI, weighted Jaccard and sr.

All logarithms are natural. ``sr`` is a distance (larger means less
related); PMI and WJC are similarities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

from .errors import UndefinedMeasureError
from .kg_store import CoocStats, KnowledgeGraph, neighbors

PMI_FLOOR = -30.0
SR_NOISE_THRESHOLD = 0.53


@dataclass(frozen=True)
class RelatednessScore:
    value: float
    measure: str  # "PMI" | "WJC" | "SR"

    def __float__(self) -> float:
        return self.value


def pmi(stats: CoocStats, x: str, y: str, floor: float = PMI_FLOOR) -> RelatednessScore:
    """log p(x,y) / (p(x) p(y)) with probabilities over co-occurrence pairs.

    Pairs that never co-occur score ``floor`` so rankings stay total.
    """
    joint = stats.pair(x, y)
    if joint == 0 or stats.total_pairs == 0:
        return RelatednessScore(floor, "PMI")
    total = stats.total_pairs
    px = stats.occurrences(x) / total
    py = stats.occurrences(y) / total
    return RelatednessScore(max(floor, math.log((joint / total) / (px * py))), "PMI")


def idf_link(g: KnowledgeGraph, e: str) -> float:
    """BM25-style inverse link frequency, clamped at zero."""
    n_e = g.n(e)
    return max(0.0, math.log((g.article_count - n_e + 0.5) / (n_e + 0.5)))


Weights = Callable[[str], float] | Mapping[str, float]


def _weigher(g: KnowledgeGraph, weights: Weights | None) -> Callable[[str], float]:
    if weights is None:
        return lambda e: idf_link(g, e)
    if isinstance(weights, Mapping):
        return weights.__getitem__
    return weights


def wjc(
    g: KnowledgeGraph,
    x: str,
    y: str,
    weights: Weights | None = None,
    direction: str = "out",
) -> RelatednessScore:
    """Weighted Jaccard coefficient of the two neighbourhoods.

    ``weights`` overrides the default :func:`idf_link` weighting.
    """
    w = _weigher(g, weights)
    nx, ny = neighbors(g, x, direction), neighbors(g, y, direction)
    union = sum(w(e) for e in nx | ny)
    if union <= 0.0:
        return RelatednessScore(0.0, "WJC")
    inter = sum(w(e) for e in nx & ny)
    return RelatednessScore(inter / union, "WJC")


def sr_from_sizes(size_a: int, size_b: int, size_ab: int, size_w: int) -> float:
    if size_ab == 0:
        return math.inf
    lo, hi = min(size_a, size_b), max(size_a, size_b)
    denom = math.log(size_w) - math.log(lo)
    if denom == 0.0:
        raise UndefinedMeasureError(
            f"sr undefined: min neighbourhood size {lo} equals corpus size {size_w}"
        )
    return (math.log(hi) - math.log(size_ab)) / denom


def sr(g: KnowledgeGraph, a: str, b: str, direction: str = "out") -> RelatednessScore:
    """Link-based distance in the style of the normalised Google distance."""
    na, nb = neighbors(g, a, direction), neighbors(g, b, direction)
    return RelatednessScore(
        sr_from_sizes(len(na), len(nb), len(na & nb), g.article_count), "SR"
    )


def is_noise(g: KnowledgeGraph, article: str, e: str, threshold: float = SR_NOISE_THRESHOLD) -> bool:
    try:
        return sr(g, article, e).value > threshold
    except UndefinedMeasureError:
        return False


@dataclass(frozen=True)
class NoiseHistogram:
    fractions: Mapping[str, float]
    bins: list[tuple[float, float, int]]

    def cumulative(self) -> list[tuple[float, float]]:
        """(bin_high, share of articles whose noisy fraction is below it)."""
        total = sum(c for _, _, c in self.bins) or 1
        out, acc = [], 0
        for _, hi, count in self.bins:
            acc += count
            out.append((hi, acc / total))
        return out

    def to_csv(self) -> str:
        rows = ["bin_low,bin_high,article_count"]
        rows += [f"{lo:g},{hi:g},{c}" for lo, hi, c in self.bins]
        return "\n".join(rows) + "\n"


def noise_distribution(
    g: KnowledgeGraph, threshold: float = SR_NOISE_THRESHOLD, bins: int = 10
) -> NoiseHistogram:
    """Per-article fraction of linked entities with ``sr`` above ``threshold``.

    Bins are ``[k/bins, (k+1)/bins)`` with the last bin closed at 1.
    Articles without links are skipped.
    """
    fractions = {}
    counts = [0] * bins
    for a in g.articles:
        targets = g.links[a]
        noisy = sum(1 for e in targets if is_noise(g, a, e, threshold))
        fractions[a] = noisy / len(targets)
        counts[min(noisy * bins // len(targets), bins - 1)] += 1
    edges = [(k / bins, (k + 1) / bins, counts[k]) for k in range(bins)]
    return NoiseHistogram(fractions, edges)
