"""Affine alignment baseline fitted by gradient descent.

Minimizes sum_i ||a_i - b_i M||^2 + gamma ||M||_F^2 over an unconstrained
d x d matrix M. Unlike an orthogonal map, M distorts pairwise distances,
which is exactly what the comparison harness is meant to expose. The
objective is convex ridge regression, so the fit can be cross-checked
against the normal-equations solution M = (B^T B + gamma I)^-1 B^T A.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import as_matrix, check_paired, words_of
from .embedding import Embedding
from .errors import NumericError


@dataclass(frozen=True)
class AffineTransform:
    """Fitted unconstrained linear map: x -> x @ matrix."""

    matrix: np.ndarray
    gamma: float
    iterations_run: int
    final_objective: float

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"matrix must be square, got {m.shape}")
        if not np.isfinite(m).all():
            raise ValueError("matrix has non-finite entries")
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")
        if self.final_objective < 0:
            raise ValueError("objective must be non-negative")
        object.__setattr__(self, "matrix", m)

    @property
    def d(self) -> int:
        return self.matrix.shape[0]


def _objective(ma, mb, m, gamma):
    resid = ma - mb @ m
    return float(np.einsum("ij,ij->", resid, resid) + gamma * np.einsum("ij,ij->", m, m))


def fit_affine(a, b, gamma: float = 1.0, lr: float | None = None,
               max_iters: int = 5000, tol: float = 1e-8) -> AffineTransform:
    """Fit M minimizing sum_i ||a_i - b_i M||^2 + gamma ||M||_F^2 by gradient descent.

    The gradient is 2 B^T (B M - A) + 2 gamma M. The default step size
    1 / (2 (||B^T B||_F + gamma)) is a safe bound on the inverse Lipschitz
    constant, so descent is monotone. Iteration stops when the gradient's
    Frobenius norm drops below `tol` or after `max_iters` steps.

    Raises:
        NumericError: if the objective increases for 10 consecutive steps,
            which indicates the step size is too large.
    """
    ma, mb = check_paired(a, b)
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    d = ma.shape[1]
    btb = mb.T @ mb
    bta = mb.T @ ma
    if lr is None:
        lr = 1.0 / (2.0 * (float(np.linalg.norm(btb)) + gamma))
    if lr <= 0:
        raise ValueError("lr must be positive")

    m = np.zeros((d, d))
    obj = _objective(ma, mb, m, gamma)
    increases = 0
    iterations = 0
    for iterations in range(1, max_iters + 1):
        grad = 2.0 * (btb @ m - bta) + 2.0 * gamma * m
        if float(np.linalg.norm(grad)) < tol:
            iterations -= 1
            break
        m = m - lr * grad
        new_obj = _objective(ma, mb, m, gamma)
        if new_obj > obj:
            increases += 1
            if increases >= 10:
                raise NumericError(
                    f"affine fit diverging: objective rose 10 consecutive steps "
                    f"(lr={lr:g}); try a smaller lr"
                )
        else:
            increases = 0
        obj = new_obj
    return AffineTransform(matrix=m, gamma=gamma, iterations_run=iterations,
                           final_objective=obj)


def ridge_solution(a, b, gamma: float = 0.0) -> np.ndarray:
    """Closed-form minimizer (B^T B + gamma I)^-1 B^T A of the same objective."""
    ma, mb = check_paired(a, b)
    d = ma.shape[1]
    return np.linalg.solve(mb.T @ mb + gamma * np.eye(d), mb.T @ ma)


def apply_affine(e, t: AffineTransform):
    """Map rows through a fitted affine transform: x -> x @ M."""
    m = as_matrix(e, "embedding")
    if m.shape[1] != t.d:
        raise ValueError(
            f"dimension mismatch: embedding has d={m.shape[1]}, transform has d={t.d}"
        )
    out = m @ t.matrix
    words = words_of(e)
    return Embedding(words, out) if words is not None else out
