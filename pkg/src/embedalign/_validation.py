"""Input validation helpers.

Most public functions accept either an Embedding or a plain (n, d) array.
`as_matrix` normalizes both to a float64 matrix; `words_of` recovers the
vocabulary when the caller passed an Embedding so results can be rewrapped.
"""
from __future__ import annotations

import numpy as np


def as_matrix(x, name: str = "input") -> np.ndarray:
    """Coerce an Embedding or array-like to a float64 (n, d) matrix."""
    vectors = getattr(x, "vectors", x)
    m = np.asarray(vectors, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix, got ndim={m.ndim}")
    if m.size and not np.isfinite(m).all():
        raise ValueError(f"{name} contains non-finite entries")
    return m


def words_of(x):
    """Vocabulary of an Embedding, or None for a bare matrix."""
    return getattr(x, "words", None)


def check_paired(a, b, a_name: str = "a", b_name: str = "b"):
    """Validate two row-corresponding inputs and return their matrices."""
    ma = as_matrix(a, a_name)
    mb = as_matrix(b, b_name)
    if ma.shape != mb.shape:
        raise ValueError(
            f"dimension mismatch: {a_name} has shape {ma.shape}, "
            f"{b_name} has shape {mb.shape}"
        )
    return ma, mb


def check_vector(x, d: int, name: str = "query") -> np.ndarray:
    v = np.asarray(x, dtype=np.float64).reshape(-1)
    if v.shape[0] != d:
        raise ValueError(f"{name} has length {v.shape[0]}, expected {d}")
    if not np.isfinite(v).all():
        raise ValueError(f"{name} contains non-finite entries")
    return v
