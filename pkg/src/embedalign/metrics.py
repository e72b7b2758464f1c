"""Distance, similarity, rank-correlation, and nearest-neighbor primitives.

Everything here is exact: kNN is a brute-force scan with a deterministic
tie-break, Spearman uses average ranks on ties. All functions are pure.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._validation import check_paired, check_vector
from .embedding import Embedding

METRICS = ("cosine", "euclidean")


@dataclass(frozen=True)
class NeighborList:
    """Top-k neighbors of a query, best first.

    Scores are cosine similarities (non-increasing) or Euclidean distances
    (non-decreasing) depending on `metric`. Ties are broken by ascending
    vocabulary index, so results are deterministic.
    """

    query_word: str
    neighbors: tuple[tuple[str, float], ...]
    metric: str

    def tokens(self) -> tuple[str, ...]:
        return tuple(w for w, _ in self.neighbors)


def rmse(a, b) -> float:
    """Root mean squared Euclidean error between corresponding rows.

    sqrt((1/n) * sum_i ||a_i - b_i||^2)
    """
    ma, mb = check_paired(a, b)
    diff = ma - mb
    return float(np.sqrt(np.einsum("ij,ij->", diff, diff) / ma.shape[0]))


def avg_cosine(a, b) -> float:
    """Mean cosine similarity of corresponding rows; errors on zero rows."""
    ma, mb = check_paired(a, b)
    na = np.linalg.norm(ma, axis=1)
    nb = np.linalg.norm(mb, axis=1)
    if np.any(na == 0) or np.any(nb == 0):
        raise ValueError("cannot take cosine of zero-norm rows")
    dots = np.einsum("ij,ij->i", ma, mb)
    return float(np.mean(dots / (na * nb)))


def _average_ranks(x: np.ndarray) -> np.ndarray:
    """Fractional ranks (1-based), ties receiving the average of their span."""
    _, inverse, counts = np.unique(x, return_inverse=True, return_counts=True)
    # average rank of the j-th distinct value = end_rank - (count - 1) / 2
    ends = np.cumsum(counts)
    avg = ends - (counts - 1) / 2.0
    return avg[inverse]


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman rank correlation: Pearson correlation of average ranks."""
    xv = np.asarray(x, dtype=np.float64)
    yv = np.asarray(y, dtype=np.float64)
    if xv.ndim != 1 or yv.ndim != 1:
        raise ValueError("inputs must be 1-D sequences")
    if xv.shape[0] != yv.shape[0]:
        raise ValueError(f"length mismatch: {xv.shape[0]} vs {yv.shape[0]}")
    if xv.shape[0] < 2:
        raise ValueError("need at least 2 observations")
    rx = _average_ranks(xv)
    ry = _average_ranks(yv)
    sx = rx - rx.mean()
    sy = ry - ry.mean()
    vx = float(sx @ sx)
    vy = float(sy @ sy)
    if vx == 0.0 or vy == 0.0:
        raise ValueError("constant input: rank variance is zero")
    return float((sx @ sy) / np.sqrt(vx * vy))


def knn(e: Embedding, query, k: int, metric: str = "cosine",
        exclude: Sequence[str] = (), query_word: str = "") -> NeighborList:
    """Exact top-k nearest words to a query vector by brute-force scan.

    Ties are broken by ascending vocabulary index. Words in `exclude` are
    never returned. Under the cosine metric, zero-norm rows rank last.

    Args:
        e: embedding to search.
        query: d-vector (or a word's vector taken from any embedding).
        k: number of neighbors, at most n minus the excluded words.
        metric: "cosine" (higher is closer) or "euclidean" (lower is closer).
        exclude: tokens to omit from the result.
        query_word: optional label carried into the result.
    """
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}, expected one of {METRICS}")
    q = check_vector(query, e.d)
    excluded = {w for w in exclude if w in e}
    available = e.n - len(excluded)
    if not 1 <= k <= available:
        raise ValueError(f"k={k} out of range: {available} searchable words")

    if metric == "cosine":
        qn = float(np.linalg.norm(q))
        if qn == 0.0:
            raise ValueError("cosine metric requires a nonzero query")
        norms = np.linalg.norm(e.vectors, axis=1)
        safe = np.where(norms > 0, norms, 1.0)
        sims = np.where(norms > 0, (e.vectors @ q) / (safe * qn), -np.inf)
        keys = -sims
    else:
        diff = e.vectors - q
        keys = np.sqrt(np.einsum("ij,ij->i", diff, diff))

    if excluded:
        mask = np.fromiter((w in excluded for w in e.words), dtype=bool, count=e.n)
        keys = np.where(mask, np.inf, keys)
    # stable sort on the ranking key keeps ascending vocabulary order on ties
    order = np.argsort(keys, kind="stable")[:k]
    sign = -1.0 if metric == "cosine" else 1.0
    neighbors = tuple((e.words[i], float(sign * keys[i])) for i in order)
    return NeighborList(query_word=query_word, neighbors=neighbors, metric=metric)
