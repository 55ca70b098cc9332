"""G-means: recursive 2-means that splits a group only when its projection
onto the line between the two sub-centres fails an Anderson-Darling
normality test.

Clustering runs on the unit sphere: input vectors are L2-normalised, the
distance is cosine distance, and a centroid is the mean of its members'
unit vectors. With that choice each Lloyd step can only lower the total
cosine cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.special import log_ndtr

from .taxonomy import SparseFeatureVector

Point = tuple[str, Mapping[str, float]]

# Stephens' case-3 table (mean and variance estimated) for the statistic
# corrected by (1 + 4/n - 25/n^2), plus the 0.0001 entry used by G-means.
CRITICAL_VALUES: tuple[tuple[float, float], ...] = (
    (0.15, 0.576),
    (0.10, 0.656),
    (0.05, 0.787),
    (0.025, 0.918),
    (0.01, 1.092),
    (0.0001, 1.8692),
)


@dataclass(frozen=True)
class ClusterConfig:
    significance: float = 0.0001
    max_iter: int = 5
    rng_seed: int = 0
    min_cluster_size: int = 2
    min_test_size: int = 8

    def __post_init__(self):
        if not 0.0 < self.significance < 0.5:
            raise ValueError("significance must lie in (0, 0.5)")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass(frozen=True)
class Cluster:
    members: tuple[str, ...]
    centroid: SparseFeatureVector


def critical_value(significance: float) -> float:
    """Critical value of the corrected A^2 statistic, log-linear in significance."""
    if not 0.0 < significance < 1.0:
        raise ValueError("significance must lie in (0, 1)")
    table = CRITICAL_VALUES
    for (s_hi, v_hi), (s_lo, v_lo) in zip(table, table[1:]):
        if s_lo <= significance <= s_hi:
            break
    else:
        # outside the table: extend the nearest segment
        (s_hi, v_hi), (s_lo, v_lo) = (table[0], table[1]) if significance > table[0][0] else (table[-2], table[-1])
    t = (math.log(significance) - math.log(s_hi)) / (math.log(s_lo) - math.log(s_hi))
    return max(0.0, v_hi + t * (v_lo - v_hi))


def anderson_darling(x: Sequence[float]) -> float:
    """Small-sample corrected A*^2 of ``x`` against a fitted normal.

    Returns 0 for fewer than two values or zero spread.
    """
    x = np.sort(np.asarray(x, dtype=float))
    n = x.size
    if n < 2:
        return 0.0
    sd = x.std(ddof=1)
    if sd == 0.0:
        return 0.0
    z = (x - x.mean()) / sd
    i = np.arange(1, n + 1)
    a2 = -n - np.sum((2 * i - 1) * (log_ndtr(z) + log_ndtr(-z[::-1]))) / n
    return float(a2 * (1.0 + 4.0 / n - 25.0 / n**2))


# -- dense core ----------------------------------------------------------------


def densify(points: Sequence[Point], normalize: bool = True) -> tuple[list[str], np.ndarray, list[str]]:
    """Stack sparse vectors into a matrix over the union of their supports."""
    ids = [pid for pid, _ in points]
    support = sorted({k for _, v in points for k in v})
    col = {k: j for j, k in enumerate(support)}
    X = np.zeros((len(points), len(support)))
    for i, (_, vec) in enumerate(points):
        for k, w in vec.items():
            X[i, col[k]] = w
    if normalize and X.size:
        peak = np.abs(X).max(axis=1)
        X[peak > 0] /= peak[peak > 0, None]
        norms = np.linalg.norm(X, axis=1)
        nz = norms > 0
        X[nz] /= norms[nz, None]
    return ids, X, support


def _cos_dist(X: np.ndarray, c: np.ndarray) -> np.ndarray:
    xn = np.linalg.norm(X, axis=1)
    cn = np.linalg.norm(c)
    out = np.ones(len(X))
    if cn == 0.0:
        return out
    nz = xn > 0
    out[nz] = 1.0 - (X[nz] @ c) / (xn[nz] * cn)
    return np.clip(out, 0.0, 2.0)


def kmeanspp_dense(X: np.ndarray, rng: np.random.Generator) -> tuple[int, int]:
    n = len(X)
    if n < 2:
        raise ValueError("need at least two points")
    first = int(rng.integers(n))
    d2 = _cos_dist(X, X[first]) ** 2
    d2[first] = 0.0
    total = d2.sum()
    if total == 0.0:
        others = [i for i in range(n) if i != first]
        return first, int(others[rng.integers(len(others))])
    return first, int(rng.choice(n, p=d2 / total))


@dataclass
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    costs: list[float]
    iterations: int


def _cost(X, labels, centers) -> float:
    return float(sum(_cos_dist(X[labels == k], centers[k]).sum() for k in (0, 1)))


def kmeans2_dense(X: np.ndarray, c1: np.ndarray, c2: np.ndarray, max_iter: int = 5) -> KMeansResult:
    """Lloyd iterations with k=2 under cosine distance.

    ``costs`` records the total cost after every assignment/update round.
    An empty side receives the point farthest from the other centre.
    """
    if len(X) < 2:
        raise ValueError("need at least two points")
    centers = np.vstack([c1, c2]).astype(float)
    labels = None
    costs: list[float] = []
    it = 0
    for it in range(1, max_iter + 1):
        d = np.column_stack([_cos_dist(X, centers[0]), _cos_dist(X, centers[1])])
        new = (d[:, 1] < d[:, 0]).astype(int)
        for k in (0, 1):
            if not np.any(new == k):
                other = 1 - k
                far = int(np.argmax(np.where(new == other, d[:, other], -np.inf)))
                new[far] = k
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        centers = np.vstack([X[labels == k].mean(axis=0) for k in (0, 1)])
        costs.append(_cost(X, labels, centers))
    return KMeansResult(labels, centers, costs, it)


def gaussian_test_dense(
    X: np.ndarray, c1: np.ndarray, c2: np.ndarray, significance: float, min_size: int = 8
) -> bool:
    """True when the projected group looks Gaussian, i.e. keep it whole."""
    if len(X) < min_size:
        return True
    v = np.asarray(c1, dtype=float) - np.asarray(c2, dtype=float)
    length = np.linalg.norm(v)
    if length == 0.0:
        return True
    projected = X @ (v / length)
    return anderson_darling(projected) <= critical_value(significance)


# -- sparse API ----------------------------------------------------------------


def _vec(support: list[str], row: np.ndarray) -> SparseFeatureVector:
    return SparseFeatureVector((support[j], float(row[j])) for j in np.flatnonzero(row > 0))


def _dense_center(c: Mapping[str, float], support: list[str]) -> np.ndarray:
    v = np.array([c.get(k, 0.0) for k in support], dtype=float)
    n = np.linalg.norm(v)
    return v / n if n > 0 else v


def kmeanspp_pair(points: Sequence[Point], rng: np.random.Generator | int) -> tuple[str, str]:
    """Pick two seeds: the first uniformly, the second with probability
    proportional to its squared cosine distance from the first."""
    rng = np.random.default_rng(rng)
    ids, X, _ = densify(points)
    i, j = kmeanspp_dense(X, rng)
    return ids[i], ids[j]


def kmeans2(
    points: Sequence[Point], c1: Mapping[str, float], c2: Mapping[str, float], max_iter: int = 5
) -> tuple[Cluster, Cluster]:
    extra = [("", {k: 0.0 for k in set(c1) | set(c2)})]
    ids, X, support = densify(list(points) + extra)
    ids, X = ids[:-1], X[:-1]
    res = kmeans2_dense(X, _dense_center(c1, support), _dense_center(c2, support), max_iter)
    return tuple(
        Cluster(tuple(ids[i] for i in np.flatnonzero(res.labels == k)), _vec(support, res.centers[k]))
        for k in (0, 1)
    )


def anderson_darling_split_test(
    points: Sequence[Point],
    c1: Mapping[str, float],
    c2: Mapping[str, float],
    significance: float = 0.0001,
    min_size: int = 8,
) -> bool:
    """True when the points projected onto ``c1 - c2`` pass the normality test."""
    extra = [("", {k: 0.0 for k in set(c1) | set(c2)})]
    _, X, support = densify(list(points) + extra)
    a = np.array([c1.get(k, 0.0) for k in support])
    b = np.array([c2.get(k, 0.0) for k in support])
    return gaussian_test_dense(X[:-1], a, b, significance, min_size)


def gmeans_cluster(points: Sequence[Point], cfg: ClusterConfig = ClusterConfig()) -> list[Cluster]:
    """Recursive bi-partition until every group passes the Gaussian test.

    Every sub-group draws from its own child of the seed sequence, so the
    output depends only on the input order, the vectors and the seed.
    """
    if not points:
        return []
    ids, X, support = densify(points)
    out: list[Cluster] = []
    stack = [(np.arange(len(ids)), np.random.SeedSequence(cfg.rng_seed))]
    while stack:
        idx, seq = stack.pop()
        sub = X[idx]
        small = len(idx) < max(2, cfg.min_cluster_size, cfg.min_test_size)
        if small or np.all(sub == sub[0]):
            out.append(Cluster(tuple(ids[i] for i in idx), _vec(support, sub.mean(axis=0))))
            continue
        rng = np.random.default_rng(seq)
        i, j = kmeanspp_dense(sub, rng)
        res = kmeans2_dense(sub, sub[i], sub[j], cfg.max_iter)
        if gaussian_test_dense(sub, res.centers[0], res.centers[1], cfg.significance, cfg.min_test_size):
            out.append(Cluster(tuple(ids[i] for i in idx), _vec(support, sub.mean(axis=0))))
            continue
        left, right = seq.spawn(2)
        stack.append((idx[res.labels == 1], right))
        stack.append((idx[res.labels == 0], left))
    return out


def make_cluster(members: Sequence[str], vectors: Mapping[str, Mapping[str, float]]) -> Cluster:
    """Cluster over ``members`` with the mean of their unit vectors as centroid."""
    if not members:
        raise ValueError("a cluster needs at least one member")
    _, X, support = densify([(m, vectors[m]) for m in members])
    return Cluster(tuple(members), _vec(support, X.mean(axis=0)))
