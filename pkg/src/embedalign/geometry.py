"""Closed-form alignment of paired point sets in arbitrary dimension.

Given two row-corresponding matrices A (target) and B (source), the optimal
orthogonal map R minimizing sum_i ||a_i - b_i R||^2 about the origin is
R = U V^T where U S V^T is the SVD of the cross-covariance H = B^T A.
Centering decouples the optimal translation, and a closed-form scalar
s = sum_i <a_i, b_i R> / ||B R||_F^2 decouples the optimal uniform scaling;
neither changes the optimal rotation. All solvers here are pure functions
over immutable inputs and are deterministic for fixed inputs.

Functions accept either Embedding objects or plain (n, d) arrays; outputs
mirror the input type.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import as_matrix, check_paired, words_of
from .embedding import Embedding
from .errors import NumericError

_EPS = np.finfo(np.float64).eps

# Relative gap below which singular values are treated as repeated, and
# relative size below which they are treated as zero; both make the fitted
# rotation non-unique and attach a warning to the Transform.
_DEGENERATE_GAP = 1e-10
_DEGENERATE_ZERO = 1e-12


@dataclass(frozen=True)
class SvdResult:
    """Full SVD of a square matrix: u @ diag(s) @ vt reconstructs the input.

    Singular values are non-negative and sorted in non-increasing order.
    """

    u: np.ndarray
    s: np.ndarray
    vt: np.ndarray

    def __post_init__(self):
        if np.any(self.s < 0) or np.any(np.diff(self.s) > 0):
            raise ValueError("singular values must be non-negative and non-increasing")


@dataclass(frozen=True)
class Transform:
    """A learned alignment: x -> scale * (x - source_mean) @ rotation + target_mean.

    `rotation` is d x d orthogonal (a reflection is possible unless the
    transform was fitted with proper=True), `scale` is a positive scalar,
    and the mean vectors are zero for uncentered fits. `fit_normalized`
    records that the parameters were fitted on row-normalized copies; the
    transform is still applied to unnormalized inputs.
    """

    rotation: np.ndarray
    scale: float = 1.0
    source_mean: np.ndarray | None = None
    target_mean: np.ndarray | None = None
    proper: bool = False
    fit_normalized: bool = False
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=np.float64)
        d = r.shape[0]
        if r.shape != (d, d):
            raise ValueError(f"rotation must be square, got {r.shape}")
        err = float(np.linalg.norm(r.T @ r - np.eye(d)))
        if err > 1e-10:
            raise ValueError(f"rotation is not orthogonal (||R'R - I||_F = {err:.2e})")
        if self.proper and abs(float(np.linalg.det(r)) - 1.0) > 1e-10:
            raise ValueError("proper transform requires det(rotation) = +1")
        object.__setattr__(self, "rotation", r)
        if not np.isfinite(self.scale) or self.scale <= 0:
            raise ValueError(f"scale must be a positive finite number, got {self.scale}")
        for name in ("source_mean", "target_mean"):
            v = getattr(self, name)
            v = np.zeros(d) if v is None else np.asarray(v, dtype=np.float64).reshape(-1)
            if v.shape[0] != d:
                raise ValueError(f"{name} has length {v.shape[0]}, expected {d}")
            object.__setattr__(self, name, v)

    @property
    def d(self) -> int:
        return self.rotation.shape[0]

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return self.scale * ((x - self.source_mean) @ self.rotation) + self.target_mean


def cross_covariance(a, b) -> np.ndarray:
    """Sum of outer products H = sum_i b_i^T a_i for row vectors a_i, b_i.

    H[j, k] = sum_i b[i, j] * a[i, k], i.e. H = B^T A, accumulated in
    float64. The SVD factors of H yield the optimal rotation from b onto a.
    """
    ma, mb = check_paired(a, b)
    return mb.T @ ma


def _round_robin_rounds(d: int) -> list[np.ndarray]:
    """Tournament schedule covering all column pairs once per sweep.

    Returns d-1 rounds (d even; d otherwise) of disjoint (p, q) pairs so
    each round can be rotated as one vectorized step.
    """
    m = d if d % 2 == 0 else d + 1
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p < d and q < d]
        rounds.append(np.array(pairs, dtype=np.intp).T)
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def jacobi_svd(h, tol: float = 1e-14, max_sweeps: int | None = None) -> SvdResult:
    """Full SVD of a small dense square matrix by one-sided Jacobi rotations.

    Column pairs of a working copy are repeatedly rotated to zero their
    inner products; at convergence the column norms are the singular values.
    Pairs are processed in a round-robin order so each round of disjoint
    pairs is applied as one vectorized step. Converged when every pair's
    normalized off-diagonal Gram mass |<w_p, w_q>| / (||w_p|| ||w_q||) is
    at most `tol`. Deterministic for a fixed input.

    Args:
        h: square matrix with finite entries.
        tol: relative off-diagonal tolerance (default 1e-14).
        max_sweeps: iteration cap, default 100 * d**2 sweeps.

    Raises:
        NumericError: if the cap is reached without convergence.
    """
    h = as_matrix(h, "h")
    d = h.shape[0]
    if h.shape[0] != h.shape[1]:
        raise ValueError(f"matrix must be square, got {h.shape}")
    if max_sweeps is None:
        max_sweeps = 100 * d * d
    if d == 1:
        val = float(h[0, 0])
        u = np.array([[1.0 if val >= 0 else -1.0]])
        return SvdResult(u, np.array([abs(val)]), np.eye(1))

    # the iteration squares column norms, so rescale extreme inputs to keep
    # the squares inside the double range; ordinary inputs pass untouched
    magnitude = float(np.max(np.abs(h)))
    prescale = 1.0
    if magnitude > 1e100 or 0.0 < magnitude < 1e-100:
        prescale = magnitude
        h = h / prescale

    # m stacks the working copy of h on top of the accumulated right factor,
    # so every rotation touches both with a single indexed update.
    m = np.concatenate([h, np.eye(d)], axis=0)
    fro2 = float(np.einsum("ij,ij->", h, h))
    # columns this small relative to ||h||_F are numerically zero; rotating
    # them against each other never converges and never matters
    drop2 = (d * _EPS) ** 2 * fro2
    rounds = _round_robin_rounds(d)
    norms2 = np.einsum("ij,ij->j", h, h)
    converged = fro2 == 0.0
    for _ in range(max_sweeps):
        if converged:
            break
        # processing larger columns first speeds up convergence
        order = np.argsort(-norms2, kind="stable")
        m = m[:, order]
        norms2 = norms2[order]
        worst = 0.0
        for pairs in rounds:
            p, q = pairs[0], pairs[1]
            alpha = norms2[p]
            beta = norms2[q]
            live = (alpha > drop2) & (beta > drop2)
            gamma = np.einsum("ij,ij->j", m[:d, p], m[:d, q])
            denom = np.sqrt(np.where(live, alpha * beta, 1.0))
            rel = np.where(live, np.abs(gamma) / denom, 0.0)
            if rel.size:
                worst = max(worst, float(rel.max()))
            idx = np.flatnonzero(rel > tol)
            if idx.size == 0:
                continue
            pa, qa = p[idx], q[idx]
            ga, aa, ba = gamma[idx], alpha[idx], beta[idx]
            # Jacobi rotation zeroing the (p, q) Gram entry; the zeta == 0
            # branch is the 45 degree case of equal column norms
            zeta = (ba - aa) / (2.0 * ga)
            t = np.where(
                zeta == 0.0,
                1.0,
                np.sign(zeta) / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta)),
            )
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = c * t
            mp, mq = m[:, pa], m[:, qa]
            m[:, pa] = c * mp - s * mq
            m[:, qa] = s * mp + c * mq
            norms2[pa] = c * c * aa - 2 * c * s * ga + s * s * ba
            norms2[qa] = s * s * aa + 2 * c * s * ga + c * c * ba
        # refresh cached norms exactly once per sweep to limit drift
        norms2 = np.einsum("ij,ij->j", m[:d], m[:d])
        converged = worst <= tol
    if not converged:
        raise NumericError(
            f"jacobi_svd did not converge within {max_sweeps} sweeps (d={d})"
        )

    sing = np.sqrt(norms2)
    sing = np.where(sing * sing <= drop2, 0.0, sing)
    order = np.argsort(-sing, kind="stable")
    sing = sing[order]
    m = m[:, order]
    k = int(np.count_nonzero(sing))
    u = np.zeros((d, d))
    if k:
        u[:, :k] = m[:d, :k] / sing[:k]
    if k < d:
        # complete u to a full orthonormal basis for zero singular values
        q_full, _ = np.linalg.qr(np.concatenate([u[:, :k], np.eye(d)], axis=1))
        u[:, k:] = q_full[:, k:d]
    return SvdResult(u, prescale * sing, m[d:].T)


def rotation_from_svd(svd: SvdResult, proper: bool = False) -> np.ndarray:
    """Optimal orthogonal map R = U V^T from the SVD of the cross-covariance.

    With proper=False the result may be a reflection (det = -1), which is
    the default behavior here. With proper=True a reflection is corrected
    to the best proper rotation by negating the last column of U, i.e.
    R = U diag(1, ..., 1, -1) V^T.
    """
    r = svd.u @ svd.vt
    if proper and np.linalg.det(r) < 0:
        u = svd.u.copy()
        u[:, -1] = -u[:, -1]
        r = u @ svd.vt
    return r


def _degeneracy_warnings(s: np.ndarray) -> tuple[str, ...]:
    """Warnings for repeated or zero singular values (rotation non-unique)."""
    smax = float(s[0]) if s.size else 0.0
    if smax == 0.0:
        return ("cross-covariance is zero: any orthogonal map is optimal",)
    out = []
    if float(s[-1]) <= _DEGENERATE_ZERO * smax:
        out.append("cross-covariance is rank-deficient: rotation is not unique")
    gaps = np.diff(s)
    if np.any(-gaps <= _DEGENERATE_GAP * smax):
        out.append("cross-covariance has repeated singular values: rotation is not unique")
    return tuple(out)


def _maybe_embedding(template, matrix):
    words = words_of(template)
    return Embedding(words, matrix) if words is not None else matrix


def _row_normalized(m: np.ndarray, name: str) -> np.ndarray:
    norms = np.linalg.norm(m, axis=1)
    if np.any(norms == 0):
        bad = np.flatnonzero(norms == 0)[:5].tolist()
        raise ValueError(f"{name} has zero-norm rows at indices {bad}")
    return m / norms[:, None]


def _fit_rotation(ma: np.ndarray, mb: np.ndarray, proper: bool):
    svd = jacobi_svd(mb.T @ ma)
    r = rotation_from_svd(svd, proper=proper)
    return r, svd.s, _degeneracy_warnings(svd.s)


def align_rotation(a, b, proper: bool = False, normalize: bool = False):
    """Rotation-only alignment of source b onto target a, about the origin.

    Returns (transform, aligned_b) where aligned_b has rows b_i @ R and R
    minimizes sum_i ||a_i - b_i R||^2 over orthogonal matrices (over proper
    rotations when proper=True). With normalize=True the rotation is fitted
    on row-normalized copies but applied to the original rows.
    """
    ma, mb = check_paired(a, b)
    fa, fb = (ma, mb) if not normalize else (
        _row_normalized(ma, "a"), _row_normalized(mb, "b"))
    r, _, warns = _fit_rotation(fa, fb, proper)
    t = Transform(rotation=r, proper=proper, fit_normalized=normalize, warnings=warns)
    return t, _maybe_embedding(b, mb @ r)


def align_centered(a, b, proper: bool = False, normalize: bool = False):
    """Center both sets, then rotate the centered source onto the centered target.

    Returns (transform, centered_a, aligned_b). The transform subtracts the
    source mean and leaves the result in the centered target frame
    (target_mean is zero); `absolute_orientation` re-translates instead.
    Equivalent to align_rotation applied to the two mean-centered inputs.
    """
    ma, mb = check_paired(a, b)
    a_mean = ma.mean(axis=0)
    b_mean = mb.mean(axis=0)
    ca = ma - a_mean
    cb = mb - b_mean
    fa, fb = (ca, cb) if not normalize else (
        _row_normalized(ca, "centered a"), _row_normalized(cb, "centered b"))
    r, _, warns = _fit_rotation(fa, fb, proper)
    t = Transform(rotation=r, source_mean=b_mean, proper=proper,
                  fit_normalized=normalize, warnings=warns)
    return t, _maybe_embedding(a, ca), _maybe_embedding(b, cb @ r)


def absolute_orientation(a, b, proper: bool = False, normalize: bool = False):
    """Centered rotation alignment with the output translated into a's frame.

    Same fitted rotation as align_centered, but the transform adds back the
    target mean, so the returned rows b_i* = (b_i - b_mean) @ R + a_mean are
    directly comparable with the original a.
    """
    t, ca, rb = align_centered(a, b, proper=proper, normalize=normalize)
    ma = as_matrix(a)
    a_mean = ma.mean(axis=0)
    t2 = Transform(rotation=t.rotation, source_mean=t.source_mean,
                   target_mean=a_mean, proper=proper,
                   fit_normalized=normalize, warnings=t.warnings)
    shifted = as_matrix(rb) + a_mean
    return t2, _maybe_embedding(b, shifted)


def optimal_scale(a, b) -> float:
    """Least-squares optimal scalar s for sum_i ||a_i - s b_i||^2.

    Closed form s = sum_i <a_i, b_i> / ||B||_F^2. Callers apply this after
    rotation; scaling a set never changes its optimal rotation, so the two
    steps decouple.
    """
    ma, mb = check_paired(a, b)
    denom = float(np.einsum("ij,ij->", mb, mb))
    if denom == 0.0:
        raise ValueError("degenerate source norm: b is all zeros")
    return float(np.einsum("ij,ij->", ma, mb)) / denom


def align_scaling(a, b, proper: bool = False, normalize: bool = False):
    """Rotation then uniform scaling of source b onto target a, about the origin.

    Returns (transform, aligned_b) with aligned rows s * (b_i @ R).
    """
    ma, mb = check_paired(a, b)
    fa, fb = (ma, mb) if not normalize else (
        _row_normalized(ma, "a"), _row_normalized(mb, "b"))
    r, _, warns = _fit_rotation(fa, fb, proper)
    s = optimal_scale(fa, fb @ r)
    if s <= 0:
        raise NumericError(
            "degenerate alignment: optimal scale is not positive "
            f"(s = {s}); inputs are anti-aligned or zero"
        )
    t = Transform(rotation=r, scale=s, proper=proper,
                  fit_normalized=normalize, warnings=warns)
    return t, _maybe_embedding(b, s * (mb @ r))


def align_centered_scaling(a, b, proper: bool = False, normalize: bool = False):
    """Center both sets, rotate, then scale: the full closed-form pipeline.

    Returns (transform, centered_a, aligned_b) where aligned rows are
    s * (b_i - b_mean) @ R, living in the centered target frame.
    """
    t0, ca, rb = align_centered(a, b, proper=proper, normalize=normalize)
    mca = as_matrix(ca)
    mrb = as_matrix(rb)
    if normalize:
        # scale is refitted on the same normalized rows the rotation saw
        fa = _row_normalized(mca, "centered a")
        fb = _row_normalized(as_matrix(b) - t0.source_mean, "centered b")
        s = optimal_scale(fa, fb @ t0.rotation)
    else:
        s = optimal_scale(mca, mrb)
    if s <= 0:
        raise NumericError(
            "degenerate alignment: optimal scale is not positive "
            f"(s = {s}); inputs are anti-aligned or zero"
        )
    t = Transform(rotation=t0.rotation, scale=s, source_mean=t0.source_mean,
                  proper=proper, fit_normalized=normalize, warnings=t0.warnings)
    return t, ca, _maybe_embedding(b, s * mrb)


def normalize_rows(e):
    """Scale every row to unit Euclidean norm. Errors on zero rows."""
    m = as_matrix(e, "embedding")
    norms = np.linalg.norm(m, axis=1)
    if np.any(norms == 0):
        bad = np.flatnonzero(norms == 0)
        words = words_of(e)
        labels = [words[i] for i in bad[:5]] if words is not None else bad[:5].tolist()
        raise ValueError(f"cannot normalize zero-norm rows: {labels}")
    return _maybe_embedding(e, m / norms[:, None])


def apply_transform(e, t: Transform):
    """Map rows through a fitted transform: x -> s * (x - source_mean) @ R + target_mean.

    Used to carry a learned alignment to words outside the fitting
    correspondence.
    """
    m = as_matrix(e, "embedding")
    if m.shape[1] != t.d:
        raise ValueError(
            f"dimension mismatch: embedding has d={m.shape[1]}, transform has d={t.d}"
        )
    return _maybe_embedding(e, t.apply(m))
