"""Diagonal maps T: X -> l_1^n, S: l_inf^n -> X and the projected frame of T(E)."""

import numpy as np
from pydantic import BaseModel, model_validator

from lozvol.errors import RankDeficiencyError
from lozvol.linalg_utils import orthonormal_columns
from lozvol.norms import SubspaceBasis, UnconditionalNorm


class EmbeddingMaps(BaseModel):
    """T = diag(1/(n lambda_i)) and its inverse S = diag(n lambda_i)."""
    T_diag: list[float]
    S_diag: list[float]

    @model_validator(mode="after")
    def _check_inverse(self):
        t = np.asarray(self.T_diag)
        s = np.asarray(self.S_diag)
        if t.shape != s.shape:
            raise ValueError("T_diag and S_diag must have equal length")
        if np.any(t <= 0) or np.any(s <= 0):
            raise ValueError("diagonal entries must be positive")
        if np.max(np.abs(t * s - 1.0)) > 1e-14:
            raise ValueError("T_diag * S_diag must be the all-ones vector")
        return self

    @property
    def t(self) -> np.ndarray:
        return np.asarray(self.T_diag)

    @property
    def s(self) -> np.ndarray:
        return np.asarray(self.S_diag)

    def operator_norms(self, norm: UnconditionalNorm) -> tuple[float, float]:
        """Exact ||T: X -> l_1^n|| = N*(T_diag) and ||S: l_inf^n -> X|| = N(S_diag)."""
        return norm.dual_evaluate(self.t), norm.evaluate(self.s)


class ProjectionFrame(BaseModel):
    """Orthonormal frame of H = T(E) and the projected unit vectors.

    Args:
        H_basis: k x n matrix with orthonormal rows spanning H.
        generators: k x n matrix; column j is x_j, the coordinates of P f_j.
    """
    H_basis: list[list[float]]
    generators: list[list[float]]

    @property
    def h(self) -> np.ndarray:
        return np.asarray(self.H_basis)

    @property
    def x(self) -> np.ndarray:
        return np.asarray(self.generators)

    @property
    def k(self) -> int:
        return len(self.H_basis)

    @property
    def n(self) -> int:
        return len(self.H_basis[0])

    def gram_residual(self) -> float:
        """max |sum_j x_j x_j^T - I_k|."""
        x = self.x
        return float(np.abs(x @ x.T - np.eye(self.k)).max())


def embed_subspace(E: SubspaceBasis, maps: EmbeddingMaps) -> ProjectionFrame:
    """Orthonormal frame of T(E) and the coordinates of P f_j in it."""
    if len(maps.T_diag) != E.ambient_dim:
        raise RankDeficiencyError(
            f"maps act on R^{len(maps.T_diag)} but E lives in R^{E.ambient_dim}"
        )
    mapped = maps.t[:, None] * E.matrix
    q = orthonormal_columns(mapped)
    h = q.T
    # P f_j = sum_r <f_j, h_r> h_r, so the coordinates of P f_j are column j of h
    return ProjectionFrame(H_basis=h.tolist(), generators=h.tolist())
