"""Position-aware aggregation of the PMI and WJC rankings of an article's links.

Each linked entity gets a blended position ``alpha*r1 + (1-alpha)*r2`` where
the mixing weight depends on both positions. Blended positions are rescaled
to [0, 1]; entities above the threshold are treated as noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .kg_store import CoocStats, KnowledgeGraph, linked
from .relatedness import PMI_FLOOR, pmi, wjc

TIE_BREAKS = ("id", "input")


@dataclass(frozen=True)
class Ranking:
    """Bijection from items to positions 1..n; position 1 is the best."""

    positions: Mapping[str, int]

    def __post_init__(self):
        if sorted(self.positions.values()) != list(range(1, len(self.positions) + 1)):
            raise ValueError("positions must be a bijection onto 1..n")

    @property
    def n(self) -> int:
        return len(self.positions)

    def order(self) -> list[str]:
        return sorted(self.positions, key=self.positions.__getitem__)

    def __getitem__(self, item: str) -> int:
        return self.positions[item]

    @classmethod
    def from_order(cls, items) -> "Ranking":
        return cls({e: i for i, e in enumerate(items, start=1)})


def rank_by(
    values: Mapping[str, float], higher_is_better: bool = True, tie_break: str = "id"
) -> Ranking:
    if not values:
        raise ValueError("cannot rank an empty set")
    if tie_break not in TIE_BREAKS:
        raise ValueError(f"unknown tie break {tie_break!r}")
    sign = -1.0 if higher_is_better else 1.0
    index = {e: i for i, e in enumerate(values)}
    secondary = (lambda e: e) if tie_break == "id" else index.__getitem__
    order = sorted(values, key=lambda e: (sign * values[e], secondary(e)))
    return Ranking.from_order(order)


def _check_positions(r1: int, r2: int, n: int) -> None:
    if not (1 <= r1 <= n and 1 <= r2 <= n):
        raise ValueError(f"positions ({r1}, {r2}) outside 1..{n}")


def alpha(r1: int, r2: int, n: int, beta: float = 1.0) -> float:
    """Weight on the first ranking: a logistic of ``ln(r1 / (n - r2))``.

    Written as ``r1^b / (r1^b + (n-r2)^b)`` which avoids the overflow of the
    reciprocal form; ``r2 == n`` is the limit value 1.
    """
    _check_positions(r1, r2, n)
    if beta <= 0:
        raise ValueError("beta must be positive")
    rest = n - r2
    if rest == 0:
        return 1.0
    if beta == 1.0:
        return r1 / (r1 + rest)
    ratio = (rest / r1) ** beta
    return 1.0 / (1.0 + ratio)


def aggregate_score(r1: int, r2: int, n: int, beta: float = 1.0) -> float:
    a = alpha(r1, r2, n, beta)
    return a * r1 + (1.0 - a) * r2


@dataclass(frozen=True)
class AggregationConfig:
    beta: float = 1.0
    threshold: float = 0.77
    tie_break: str = "id"
    pmi_floor: float = PMI_FLOOR

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must lie in [0, 1]")
        if self.tie_break not in TIE_BREAKS:
            raise ValueError(f"unknown tie break {self.tie_break!r}")


@dataclass(frozen=True)
class FilterResult:
    article: str
    related: list[str]
    noise: list[str]
    scores: dict[str, float] = field(default_factory=dict)

    def ordering(self) -> Ranking:
        """Linked entities from most to least related (ties keep article order)."""
        items = self.related + self.noise
        return rank_by({e: self.scores[e] for e in items}, higher_is_better=False, tie_break="input")


def filter_noise(
    g: KnowledgeGraph,
    stats: CoocStats,
    article: str,
    cfg: AggregationConfig = AggregationConfig(),
) -> FilterResult:
    """Split an article's linked entities into related and noise.

    Both lists keep article order. ``scores`` holds the rescaled blended
    position of every linked entity.
    """
    targets = linked(g, article)
    n = len(targets)
    if n == 0:
        return FilterResult(article, [], [], {})
    if n == 1:
        return FilterResult(article, list(targets), [], {targets[0]: 0.0})
    r1 = rank_by({e: pmi(stats, article, e, cfg.pmi_floor).value for e in targets}, True, cfg.tie_break)
    r2 = rank_by({e: wjc(g, article, e).value for e in targets}, True, cfg.tie_break)
    scores = {
        e: (aggregate_score(r1[e], r2[e], n, cfg.beta) - 1.0) / (n - 1) for e in targets
    }
    related = [e for e in targets if scores[e] <= cfg.threshold]
    noise = [e for e in targets if scores[e] > cfg.threshold]
    return FilterResult(article, related, noise, scores)
