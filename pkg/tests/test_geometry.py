import numpy as np
import pytest

from embedalign import (
    Embedding,
    NumericError,
    absolute_orientation,
    align_centered,
    align_centered_scaling,
    align_rotation,
    align_scaling,
    apply_transform,
    cross_covariance,
    jacobi_svd,
    normalize_rows,
    optimal_scale,
    rmse,
    rotation_from_svd,
)
from embedalign.geometry import Transform

from conftest import make_embedding, random_orthogonal


# ---------------------------------------------------------------- oracles

def char_poly_singular_values(h):
    """Singular values via the characteristic polynomial of H^T H.

    Coefficients come from the Faddeev-LeVerrier recurrence, roots from the
    companion matrix, so nothing here shares code with an SVD.
    """
    a = h.T @ h
    d = a.shape[0]
    coeffs = [1.0]
    m = np.zeros_like(a)
    for k in range(1, d + 1):
        m = a @ m + coeffs[-1] * np.eye(d)
        coeffs.append(-np.trace(a @ m) / k)
    roots = np.roots(coeffs)
    eigs = np.sort(np.abs(roots))[::-1]  # eigenvalues of H^T H are real >= 0
    return np.sqrt(eigs)


def rmse_over_angles(a, b, thetas, reflect=False):
    """RMSE of b @ R(theta) against a for a grid of 2-D rotation angles.

    Uses sum ||a_i - b_i R||^2 = ||a||^2 + ||b||^2 - 2 <a, bR>, where the
    inner product is alpha cos(theta) + beta sin(theta) in closed form.
    R(theta) = [[cos, sin], [-sin, cos]]; reflect composes diag(1, -1) first.
    """
    bb = b @ np.diag([1.0, -1.0]) if reflect else b
    alpha = float(np.sum(a * bb))
    beta = float(np.sum(a[:, 0] * bb[:, 1] - a[:, 1] * bb[:, 0]))
    const = float(np.sum(a * a) + np.sum(b * b))
    sq = const - 2.0 * (alpha * np.cos(thetas) + beta * np.sin(thetas))
    return np.sqrt(np.maximum(sq, 0.0) / a.shape[0])


def golden_section_scale(a, b, lo=-100.0, hi=100.0, iters=60):
    """Minimize s -> sum ||a_i - s b_i||^2 by golden-section line search.

    Plain golden section can only localize a smooth minimum to about
    sqrt(eps), so a final parabolic vertex through three sampled points
    (exact for this quadratic objective) sharpens the answer. Everything
    is derived from objective samples only.
    """
    phi = (np.sqrt(5.0) - 1.0) / 2.0

    def f(s):
        diff = a - s * b
        return float(np.sum(diff * diff))

    c, d = hi - phi * (hi - lo), lo + phi * (hi - lo)
    for _ in range(iters):
        if f(c) < f(d):
            hi = d
        else:
            lo = c
        c, d = hi - phi * (hi - lo), lo + phi * (hi - lo)
    mid = (lo + hi) / 2.0
    span = max(hi - lo, 1e-3)
    x0, x1, x2 = mid - span, mid, mid + span
    f0, f1, f2 = f(x0), f(x1), f(x2)
    num = (x1 - x0) ** 2 * (f1 - f2) - (x1 - x2) ** 2 * (f1 - f0)
    den = (x1 - x0) * (f1 - f2) - (x1 - x2) * (f1 - f0)
    return x1 - 0.5 * num / den


# ---------------------------------------------------------- cross_covariance

def test_cross_covariance_single_unit_vector():
    a = np.array([[1.0, 0.0]])
    h = cross_covariance(a, a)
    assert np.array_equal(h, np.array([[1.0, 0.0], [0.0, 0.0]]))


def test_cross_covariance_coordinate_swap():
    a = np.array([[1.0, 0.0], [0.0, 1.0]])
    b = np.array([[0.0, 1.0], [1.0, 0.0]])
    h = cross_covariance(a, b)
    assert np.array_equal(h, np.array([[0.0, 1.0], [1.0, 0.0]]))


def test_cross_covariance_matches_triple_loop(rng):
    a = rng.standard_normal((5, 3))
    b = rng.standard_normal((5, 3))
    expected = np.zeros((3, 3))
    for i in range(5):
        for j in range(3):
            for k in range(3):
                expected[j, k] += b[i, j] * a[i, k]
    assert np.allclose(cross_covariance(a, b), expected, atol=1e-12)


def test_cross_covariance_shape_mismatch_names_both_shapes():
    with pytest.raises(ValueError, match=r"\(2, 2\).*\(3, 2\)"):
        cross_covariance(np.zeros((2, 2)), np.zeros((3, 2)))


def test_cross_covariance_accepts_embeddings(rng):
    a = make_embedding(rng.standard_normal((4, 3)))
    b = make_embedding(rng.standard_normal((4, 3)))
    assert np.allclose(cross_covariance(a, b), b.vectors.T @ a.vectors)


# ------------------------------------------------------------------ jacobi_svd

def test_svd_identity():
    res = jacobi_svd(np.eye(3))
    assert np.allclose(res.s, [1.0, 1.0, 1.0])
    assert np.allclose(res.u @ np.diag(res.s) @ res.vt, np.eye(3))


def test_svd_diagonal_with_sign():
    res = jacobi_svd(np.diag([3.0, -2.0]))
    assert np.allclose(res.s, [3.0, 2.0])
    assert np.allclose(res.u @ np.diag(res.s) @ res.vt, np.diag([3.0, -2.0]), atol=1e-14)


def test_svd_matches_char_poly_oracle(rng):
    h = rng.standard_normal((4, 4))
    res = jacobi_svd(h)
    oracle = char_poly_singular_values(h)
    assert np.allclose(res.s, oracle, rtol=1e-9, atol=1e-12)
    recon = res.u @ np.diag(res.s) @ res.vt
    assert np.linalg.norm(recon - h) / np.linalg.norm(h) < 1e-9


@pytest.mark.parametrize("d", [1, 2, 3, 5, 8, 17])
def test_svd_invariants_random(d, rng):
    for _ in range(10):
        h = rng.standard_normal((d, d)) * 10.0 ** float(rng.integers(-3, 4))
        res = jacobi_svd(h)
        assert np.all(res.s >= 0)
        assert np.all(np.diff(res.s) <= 0)
        assert np.linalg.norm(res.u.T @ res.u - np.eye(d)) < 1e-12
        assert np.linalg.norm(res.vt @ res.vt.T - np.eye(d)) < 1e-12
        recon = res.u @ np.diag(res.s) @ res.vt
        assert np.linalg.norm(recon - h) / np.linalg.norm(h) < 1e-9


def test_svd_rank_deficient_and_zero(rng):
    for h in (np.zeros((3, 3)), np.ones((5, 5)),
              rng.standard_normal((6, 2)) @ rng.standard_normal((2, 6))):
        d = h.shape[0]
        res = jacobi_svd(h)
        assert np.linalg.norm(res.u.T @ res.u - np.eye(d)) < 1e-12
        assert np.linalg.norm(res.vt @ res.vt.T - np.eye(d)) < 1e-12
        recon = res.u @ np.diag(res.s) @ res.vt
        scale = max(np.linalg.norm(h), 1.0)
        assert np.linalg.norm(recon - h) / scale < 1e-12


def test_svd_handles_extreme_magnitudes(rng):
    base = rng.standard_normal((4, 4))
    ref = jacobi_svd(base)
    for scale in (1e200, 1e-200):
        res = jacobi_svd(scale * base)
        assert np.all(np.isfinite(res.s))
        assert np.allclose(res.s / scale, ref.s, rtol=1e-12)
        assert np.linalg.norm(res.u.T @ res.u - np.eye(4)) < 1e-12
        # compare the reconstruction in the unscaled frame; norms of the
        # raw 1e+/-200 matrices would themselves overflow or underflow
        recon = res.u @ np.diag(res.s / scale) @ res.vt
        assert np.linalg.norm(recon - base) / np.linalg.norm(base) < 1e-12


def test_svd_deterministic(rng):
    h = rng.standard_normal((12, 12))
    r1 = jacobi_svd(h)
    r2 = jacobi_svd(h.copy())
    assert np.array_equal(r1.u, r2.u)
    assert np.array_equal(r1.s, r2.s)
    assert np.array_equal(r1.vt, r2.vt)


def test_svd_iteration_cap_raises(rng):
    h = rng.standard_normal((8, 8))
    with pytest.raises(NumericError, match="converge"):
        jacobi_svd(h, max_sweeps=1)


def test_svd_rejects_non_square():
    with pytest.raises(ValueError, match="square"):
        jacobi_svd(np.zeros((2, 3)))


# ---------------------------------------------------------- rotation_from_svd

def test_rotation_identity_factors():
    res = jacobi_svd(np.eye(3))
    assert np.allclose(rotation_from_svd(res), np.eye(3))


def test_rotation_proper_forces_positive_det(rng):
    # a reflection-heavy cross covariance: b is a mirrored copy of a
    a = rng.standard_normal((20, 3))
    b = a @ np.diag([1.0, 1.0, -1.0])
    res = jacobi_svd(cross_covariance(a, b))
    r_free = rotation_from_svd(res, proper=False)
    r_proper = rotation_from_svd(res, proper=True)
    assert np.linalg.det(r_free) < 0
    assert abs(np.linalg.det(r_proper) - 1.0) < 1e-10


def test_rotation_2d_reflection_grid_oracle(rng):
    # data whose best orthogonal map is a flip: the proper fit must lose
    a = rng.standard_normal((12, 2))
    b = a @ np.diag([1.0, -1.0])
    t_free, out_free = align_rotation(a, b, proper=False)
    t_proper, out_proper = align_rotation(a, b, proper=True)
    thetas = np.arange(0.0, 2 * np.pi, 1e-4)
    best_rotation = float(rmse_over_angles(a, b, thetas).min())
    best_reflection = float(rmse_over_angles(a, b, thetas, reflect=True).min())
    assert rmse(a, out_free) <= best_reflection + 1e-6
    assert rmse(a, out_proper) <= best_rotation + 1e-6
    assert rmse(a, out_proper) > rmse(a, out_free)
    assert np.linalg.det(t_free.rotation) < 0
    assert abs(np.linalg.det(t_proper.rotation) - 1.0) < 1e-10


# -------------------------------------------------------------- align_rotation

def test_align_rotation_identity(rng):
    a = rng.standard_normal((15, 4))
    t, aligned = align_rotation(a, a)
    assert np.allclose(t.rotation, np.eye(4), atol=1e-12)
    assert rmse(a, aligned) < 1e-12
    assert t.scale == 1.0
    assert np.all(t.source_mean == 0) and np.all(t.target_mean == 0)


def test_align_rotation_exact_recovery_large(rng):
    a = rng.standard_normal((1000, 50))
    b = a @ random_orthogonal(rng, 50)
    _, aligned = align_rotation(a, b)
    assert rmse(a, aligned) < 1e-8


def test_align_rotation_beats_angle_grid(rng):
    a = rng.standard_normal((10, 2))
    b = rng.standard_normal((10, 2))
    _, aligned = align_rotation(a, b)
    thetas = np.arange(0.0, 2 * np.pi, 1e-5)
    grid_min = float(rmse_over_angles(a, b, thetas).min())
    assert rmse(a, aligned) <= grid_min + 1e-6


def test_align_rotation_embedding_roundtrip(rng):
    a = make_embedding(rng.standard_normal((6, 3)))
    b = make_embedding(a.vectors @ random_orthogonal(rng, 3))
    t, aligned = align_rotation(a, b)
    assert isinstance(aligned, Embedding)
    assert aligned.words == b.words
    assert rmse(a, aligned) < 1e-12


def test_align_rotation_degenerate_warning():
    a = np.array([[1.0, 0.0], [0.0, 1.0]])
    t, _ = align_rotation(a, a)  # H = I has repeated singular values
    assert any("repeated" in w for w in t.warnings)


def test_align_rotation_dimension_mismatch():
    with pytest.raises(ValueError, match="mismatch"):
        align_rotation(np.zeros((3, 2)), np.zeros((3, 3)))


# -------------------------------------------------------------- align_centered

def test_align_centered_pure_translation(rng):
    a = rng.standard_normal((10, 3))
    b = a + np.array([5.0, -2.0, 0.5])
    t, ca, aligned = align_centered(a, b)
    assert np.allclose(t.rotation, np.eye(3), atol=1e-12)
    assert rmse(ca, aligned) < 1e-12


def test_align_centered_exact_recovery(rng):
    a = rng.standard_normal((30, 4))
    r0 = random_orthogonal(rng, 4)
    b = (a - a.mean(axis=0)) @ r0 + rng.standard_normal(4)
    _, ca, aligned = align_centered(a, b)
    assert rmse(ca, aligned) < 1e-8


def test_align_centered_matches_manual_centering_bitwise(rng):
    a = rng.standard_normal((10, 3))
    b = rng.standard_normal((10, 3))
    t, ca, aligned = align_centered(a, b)
    t2, aligned2 = align_rotation(a - a.mean(axis=0), b - b.mean(axis=0))
    assert np.array_equal(t.rotation, t2.rotation)
    assert np.array_equal(np.asarray(aligned), np.asarray(aligned2))


def test_absolute_orientation_translates_into_target_frame(rng):
    a = rng.standard_normal((25, 3))
    r0 = random_orthogonal(rng, 3)
    b = (a - a.mean(axis=0)) @ r0 + np.array([1.0, 2.0, 3.0])
    t, out = absolute_orientation(a, b)
    assert rmse(a, out) < 1e-8
    assert np.allclose(t.target_mean, a.mean(axis=0))
    # applying the transform reproduces the returned rows
    assert np.allclose(apply_transform(b, t), out, atol=1e-12)


# --------------------------------------------------------------- optimal_scale

def test_optimal_scale_identity(rng):
    a = rng.standard_normal((8, 3))
    assert optimal_scale(a, a) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("c", [0.5, 2.0, 10.0])
def test_optimal_scale_inverse_of_multiplier(c, rng):
    a = rng.standard_normal((12, 4))
    assert abs(optimal_scale(a, c * a) - 1.0 / c) < 1e-12


def test_optimal_scale_matches_golden_section(rng):
    a = rng.standard_normal((20, 4))
    b = rng.standard_normal((20, 4))
    s = optimal_scale(a, b)
    assert abs(s - golden_section_scale(a, b)) < 1e-10


def test_optimal_scale_zero_source_errors():
    with pytest.raises(ValueError, match="degenerate source norm"):
        optimal_scale(np.ones((3, 2)), np.zeros((3, 2)))


# --------------------------------------------------------------- align_scaling

def test_align_scaling_exact_recovery(rng):
    a = rng.standard_normal((40, 5))
    c = 3.7
    b = c * (a @ random_orthogonal(rng, 5))
    t, aligned = align_scaling(a, b)
    assert abs(t.scale - 1.0 / c) < 1e-10
    assert rmse(a, aligned) < 1e-8


def test_align_scaling_rotation_invariant_to_source_scale(rng):
    a = rng.standard_normal((20, 4))
    b = rng.standard_normal((20, 4))
    t1, _ = align_scaling(a, b)
    t2, _ = align_scaling(a, 7.3 * b)
    assert np.allclose(t1.rotation, t2.rotation, atol=1e-10)


def test_align_scaling_beats_sampled_rotations_d3(rng):
    # oracle: sample many rotations, refine locally around the best one,
    # fit the scale in closed form for each candidate
    a = rng.standard_normal((15, 3))
    b = rng.standard_normal((15, 3))
    t, aligned = align_scaling(a, b)
    fitted = rmse(a, aligned)

    def scaled_rmse(r):
        br = b @ r
        s = float(np.sum(a * br) / np.sum(br * br))
        diff = a - s * br
        return float(np.sqrt(np.sum(diff * diff) / a.shape[0]))

    qs, rs = np.linalg.qr(rng.standard_normal((20000, 3, 3)))
    qs = qs * np.sign(np.einsum("...ii->...i", rs))[:, None, :]
    best = np.eye(3)
    best_val = scaled_rmse(best)
    for q in qs:
        val = scaled_rmse(q)
        if val < best_val:
            best, best_val = q, val
    for step in (0.3, 0.1, 0.03, 0.01, 0.003, 0.001):
        for _ in range(400):
            gen = rng.standard_normal((3, 3))
            skew = step * (gen - gen.T) / 2.0
            # first-order rotation update, re-orthogonalized by QR
            q, r = np.linalg.qr(best @ (np.eye(3) + skew))
            q = q * np.sign(np.diag(r))
            val = scaled_rmse(q)
            if val < best_val:
                best, best_val = q, val
    assert fitted <= best_val + 1e-6


def test_align_scaling_all_zero_source_errors(rng):
    a = rng.standard_normal((5, 2))
    with pytest.raises(ValueError, match="degenerate source norm"):
        align_scaling(a, np.zeros((5, 2)))


# ------------------------------------------------------ align_centered_scaling

def test_align_centered_scaling_full_recovery(rng):
    a = rng.standard_normal((50, 6))
    c = 2.5
    r0 = random_orthogonal(rng, 6)
    b = c * (a - a.mean(axis=0)) @ r0 + rng.standard_normal(6)
    t, ca, aligned = align_centered_scaling(a, b)
    assert rmse(ca, aligned) < 1e-8
    assert abs(t.scale - 1.0 / c) < 1e-10


def test_align_centered_scaling_idempotent(rng):
    a = rng.standard_normal((30, 4))
    b = 1.8 * (a @ random_orthogonal(rng, 4)) + 0.3
    _, ca, aligned = align_centered_scaling(a, b)
    before = rmse(ca, aligned)
    _, ca2, aligned2 = align_centered_scaling(np.asarray(ca), np.asarray(aligned))
    assert abs(rmse(ca2, aligned2) - before) < 1e-10


def test_align_centered_scaling_matches_manual_pipeline(rng):
    a = rng.standard_normal((12, 3))
    b = rng.standard_normal((12, 3))
    t, ca, aligned = align_centered_scaling(a, b)
    ca_m = a - a.mean(axis=0)
    cb_m = b - b.mean(axis=0)
    t_rot, rotated = align_rotation(ca_m, cb_m)
    s = optimal_scale(ca_m, np.asarray(rotated))
    assert np.array_equal(t.rotation, t_rot.rotation)
    assert t.scale == pytest.approx(s, abs=0)
    assert np.allclose(aligned, s * np.asarray(rotated), atol=1e-15)


# --------------------------------------------------------------- normalize_rows

def test_normalize_rows_345():
    e = make_embedding(np.array([[3.0, 4.0]]))
    out = normalize_rows(e)
    assert np.allclose(out.vectors, [[0.6, 0.8]])


def test_normalize_rows_unit_rows_unchanged(rng):
    m = rng.standard_normal((6, 4))
    m /= np.linalg.norm(m, axis=1, keepdims=True)
    assert np.allclose(normalize_rows(m), m, atol=1e-15)


def test_normalize_rows_all_norms_one(rng):
    out = normalize_rows(rng.standard_normal((40, 7)) * 100)
    norms = np.linalg.norm(out, axis=1)
    assert np.all(np.abs(norms - 1.0) <= 1e-12)


def test_normalize_rows_zero_row_lists_words():
    e = Embedding(["good", "bad"], np.array([[1.0, 0.0], [0.0, 0.0]]))
    with pytest.raises(ValueError, match="bad"):
        normalize_rows(e)


# -------------------------------------------------------------- apply_transform

def test_apply_identity_transform(rng):
    m = rng.standard_normal((9, 3))
    t = Transform(rotation=np.eye(3))
    assert np.array_equal(apply_transform(m, t), m)


def test_apply_transform_consistent_with_fit(rng):
    a = rng.standard_normal((20, 4))
    b = 2.0 * (a - a.mean(axis=0)) @ random_orthogonal(rng, 4) + 1.0
    t, ca, aligned = align_centered_scaling(a, b)
    assert np.allclose(apply_transform(b, t), np.asarray(aligned), atol=1e-12)


def test_apply_transform_generalizes_to_held_out_rows(rng):
    a = rng.standard_normal((200, 6))
    r0 = random_orthogonal(rng, 6)
    b = a @ r0
    t, _ = align_rotation(a[:100], b[:100])
    mapped = apply_transform(b[100:], t)
    assert rmse(a[100:], mapped) < 1e-8


def test_apply_transform_dimension_mismatch(rng):
    t = Transform(rotation=np.eye(3))
    with pytest.raises(ValueError, match="mismatch"):
        apply_transform(rng.standard_normal((4, 2)), t)


# ------------------------------------------------------------------- Transform

def test_transform_validates_scale():
    with pytest.raises(ValueError, match="scale"):
        Transform(rotation=np.eye(2), scale=0.0)
    with pytest.raises(ValueError, match="scale"):
        Transform(rotation=np.eye(2), scale=-1.0)


def test_transform_validates_mean_lengths():
    with pytest.raises(ValueError, match="source_mean"):
        Transform(rotation=np.eye(2), source_mean=np.zeros(3))


def test_transform_requires_orthogonal_rotation():
    with pytest.raises(ValueError, match="orthogonal"):
        Transform(rotation=np.array([[1.0, 0.0], [0.0, 2.0]]))


def test_transform_proper_flag_requires_positive_det():
    reflection = np.diag([1.0, -1.0])
    Transform(rotation=reflection)  # fine without the proper flag
    with pytest.raises(ValueError, match="proper"):
        Transform(rotation=reflection, proper=True)


def test_svd_result_validates_ordering():
    from embedalign import SvdResult

    with pytest.raises(ValueError, match="non-increasing"):
        SvdResult(np.eye(2), np.array([1.0, 2.0]), np.eye(2))
    with pytest.raises(ValueError, match="non-negative"):
        SvdResult(np.eye(2), np.array([1.0, -0.5]), np.eye(2))
