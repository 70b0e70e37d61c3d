"""Small linear algebra helpers shared by the geometry modules."""

import itertools
import math

import numpy as np
import scipy.linalg

from lozvol.errors import RankDeficiencyError


def orthonormal_columns(matrix: np.ndarray, rank_tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the column span via QR.

    Signs are fixed so that R has a positive diagonal, which makes the frame
    deterministic for a given input.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[1] == 0:
        raise RankDeficiencyError(f"expected a non-empty 2-D matrix, got shape {matrix.shape}")
    check_full_column_rank(matrix, rank_tol)
    q, r = np.linalg.qr(matrix, mode="reduced")
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def check_full_column_rank(matrix: np.ndarray, rank_tol: float = 1e-10):
    norms = np.linalg.norm(matrix, axis=0)
    if np.any(norms == 0):
        raise RankDeficiencyError("matrix has a zero column")
    singular = np.linalg.svd(matrix / norms, compute_uv=False)
    if singular.min() <= rank_tol:
        raise RankDeficiencyError(
            f"columns are linearly dependent (smallest singular value {singular.min():.3e})"
        )


def orthogonal_complement(u: np.ndarray) -> np.ndarray:
    """Columns form an orthonormal basis of u⊥ (shape k x (k-1))."""
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    return scipy.linalg.null_space(u[None, :])


def sign_vectors(n: int) -> np.ndarray:
    """All 2^n vectors in {-1, 1}^n, in lexicographic order."""
    return np.array(list(itertools.product((-1.0, 1.0), repeat=n)))


def unit_vectors(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """Uniform directions on the Euclidean sphere."""
    g = rng.standard_normal((count, dim))
    lengths = np.linalg.norm(g, axis=1)
    while np.any(lengths == 0):
        bad = lengths == 0
        g[bad] = rng.standard_normal((int(bad.sum()), dim))
        lengths = np.linalg.norm(g, axis=1)
    return g / lengths[:, None]


def unit_ball_volume(k: int) -> float:
    """Volume of the Euclidean unit ball in R^k."""
    return math.pi ** (k / 2) / math.gamma(k / 2 + 1)


def cross_polytope_volume(k: int) -> float:
    return 2.0 ** k / math.factorial(k)


def cube_volume(k: int) -> float:
    return 2.0 ** k
