import numpy as np
import pytest

from embedalign import Embedding


def make_embedding(matrix, prefix="w"):
    matrix = np.asarray(matrix, dtype=np.float64)
    return Embedding([f"{prefix}{i}" for i in range(matrix.shape[0])], matrix)


def random_embedding(rng, n, d, prefix="w"):
    return make_embedding(rng.standard_normal((n, d)), prefix=prefix)


def random_orthogonal(rng, d):
    """Haar-distributed orthogonal matrix via sign-corrected QR."""
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def random_rotation(rng, d):
    """Haar-distributed proper rotation (det +1)."""
    q = random_orthogonal(rng, d)
    if np.linalg.det(q) < 0:
        q[:, -1] = -q[:, -1]
    return q


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
