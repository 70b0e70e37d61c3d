"""Unit balls of subspaces and quotients of an unconditional norm.

NormBall(norm, F) is {y in R^k : N(F y) <= 1} for an n x k frame F with
orthonormal columns, i.e. B_E for E = range(F) measured in F-coordinates.
QuotientBall(norm, G) is G^T(B_X) for an n x k matrix G of rank k. With
G = Q^T this is Q(B_X) in the coordinates of R^k; with orthonormal columns it
is the orthogonal projection of B_X onto range(G). Both are the unit ball of
X / ker(G^T); volume ratios agree between them, section ratios do not.
"""

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Union

import numpy as np

from lozvol.defaults import setting
from lozvol.errors import DegenerateBodyError, VolumeEstimateError, VolumeMethod
from lozvol.linalg_utils import check_full_column_rank, orthonormal_columns, unit_vectors
from lozvol.norms import SubspaceBasis, UnconditionalNorm
from lozvol.ui.logging_config import logger
from lozvol.volume.montecarlo import estimate_volume
from lozvol.volume.polytopes import PolytopeH, PolytopeV, VolumeEstimate, unique_rows, volume_hrep, volume_vrep


def sandwich_directions(dim: int, count: int, seed: int = 0) -> np.ndarray:
    """Coordinate directions followed by `count` random unit vectors, both signs."""
    rng = np.random.default_rng(seed)
    dirs = np.vstack([np.eye(dim), unit_vectors(rng, count, dim)])
    return np.vstack([dirs, -dirs])


@dataclass(frozen=True, eq=False)
class NormBall:
    norm: UnconditionalNorm
    frame: np.ndarray

    def __post_init__(self):
        frame = np.asarray(self.frame, dtype=float)
        if frame.ndim != 2 or frame.shape[0] != self.norm.dim:
            raise DegenerateBodyError(f"frame of shape {frame.shape} does not match a norm on R^{self.norm.dim}")
        if np.abs(frame.T @ frame - np.eye(frame.shape[1])).max() > 1e-10:
            raise DegenerateBodyError("frame columns must be orthonormal")
        object.__setattr__(self, "frame", frame)

    @classmethod
    def of_subspace(cls, norm: UnconditionalNorm, E: Optional[SubspaceBasis] = None) -> "NormBall":
        if E is None:
            return cls(norm, np.eye(norm.dim))
        return cls(norm, E.orthonormal_frame())

    @property
    def dim(self) -> int:
        return self.frame.shape[1]

    @property
    def is_polytopal(self) -> bool:
        return self.norm.is_polytopal

    def gauge(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return self.norm._eval(pts @ self.frame.T)

    def radial(self, directions) -> np.ndarray:
        return 1.0 / self.gauge(directions)

    def half_widths(self) -> np.ndarray:
        """|y_j| = |<f_j, x>| <= N*(f_j) on the body."""
        return np.asarray(self.norm.dual_evaluate(self.frame.T), dtype=float)

    def radius(self) -> float:
        """Euclidean radius bound: |x_i| <= 1 / N(e_i) on B_X."""
        return float(np.sqrt(np.sum(self.norm.unit_vector_norms() ** -2.0)))

    def section(self, basis: np.ndarray) -> "NormBall":
        """Intersection with span(basis), basis a k x m matrix with orthonormal columns."""
        return NormBall(self.norm, self.frame @ np.asarray(basis, dtype=float))

    @cached_property
    def polytope(self) -> PolytopeH:
        """Exact H-rep when every leaf of the norm is polytopal."""
        if not self.is_polytopal:
            raise DegenerateBodyError("unit ball is not a polytope")
        normals = self.norm.dual_ball_vertices() @ self.frame
        normals = normals[np.abs(normals).max(axis=1) > 1e-14]
        return PolytopeH(unique_rows(normals))

    def inner_polytope(self, count: Optional[int] = None, seed: int = 0) -> PolytopeV:
        """Hull of boundary points; contained in the body."""
        count = setting("volume.sandwich_directions") if count is None else count
        u = sandwich_directions(self.dim, count, seed)
        return PolytopeV(u / self.gauge(u)[:, None])


@dataclass(frozen=True, eq=False)
class QuotientBall:
    norm: UnconditionalNorm
    frame: np.ndarray

    def __post_init__(self):
        frame = np.asarray(self.frame, dtype=float)
        if frame.ndim != 2 or frame.shape[0] != self.norm.dim:
            raise DegenerateBodyError(f"frame of shape {frame.shape} does not match a norm on R^{self.norm.dim}")
        object.__setattr__(self, "frame", frame)

    @classmethod
    def of_map(cls, norm: UnconditionalNorm, quotient) -> "QuotientBall":
        """Q(B_X) for the k x n surjection Q, in the coordinates of R^k."""
        q = np.atleast_2d(np.asarray(quotient, dtype=float))
        check_full_column_rank(q.T)
        return cls(norm, q.T)

    @classmethod
    def projected(cls, norm: UnconditionalNorm, quotient) -> "QuotientBall":
        """Orthogonal projection of B_X onto range(Q^T), in an orthonormal frame of it."""
        q = np.atleast_2d(np.asarray(quotient, dtype=float))
        return cls(norm, orthonormal_columns(q.T))

    @property
    def dim(self) -> int:
        return self.frame.shape[1]

    @property
    def is_polytopal(self) -> bool:
        return self.norm.is_polytopal

    def support(self, directions) -> np.ndarray:
        """h(u) = N*(G u)."""
        u = np.atleast_2d(np.asarray(directions, dtype=float))
        return np.asarray(self.norm.dual_evaluate(u @ self.frame.T), dtype=float).reshape(len(u))

    def dual_ball(self) -> NormBall:
        """The polar body: {u : N*(G u) <= 1}."""
        return NormBall(self.norm.dual(), self.frame)

    @cached_property
    def polytope(self) -> PolytopeV:
        if not self.is_polytopal:
            raise DegenerateBodyError("quotient ball is not a polytope")
        return PolytopeV(unique_rows(self.norm.ball_vertices() @ self.frame)).extreme()

    def inner_polytope(self, count: Optional[int] = None, seed: int = 0) -> PolytopeV:
        """Hull of the support points G^T x(u); contained in the body."""
        count = setting("volume.sandwich_directions") if count is None else count
        u = sandwich_directions(self.dim, count, seed)
        points = np.array([self.norm.dual_maximizer(row) for row in u @ self.frame.T]) @ self.frame
        return PolytopeV(unique_rows(points))

    def outer_polytope(self, count: Optional[int] = None, seed: int = 0) -> PolytopeH:
        """{y : <u, y> <= h(u)} over the sandwich directions; contains the body."""
        count = setting("volume.sandwich_directions") if count is None else count
        u = sandwich_directions(self.dim, count, seed)
        return PolytopeH(u / self.support(u)[:, None])


Body = Union[PolytopeV, PolytopeH, NormBall, QuotientBall]


def inner_polytope(body: Body, seed: int = 0) -> Union[PolytopeV, PolytopeH]:
    """A polytope inside `body`; the body itself when it is already polytopal."""
    if isinstance(body, (PolytopeV, PolytopeH)):
        return body
    if body.is_polytopal:
        return body.polytope
    return body.inner_polytope(seed=seed)


def body_volume(body: Body, samples: Optional[int] = None, seed: int = 0) -> VolumeEstimate:
    """Exact volume when possible, Monte Carlo or a polytope sandwich otherwise."""
    max_dim = setting("volume.exact_max_dim")
    if isinstance(body, PolytopeV):
        return volume_vrep(body)
    if isinstance(body, PolytopeH):
        return volume_hrep(body)
    if body.dim == 1:
        return _segment_length(body)
    if body.is_polytopal and body.dim <= max_dim:
        poly = body.polytope
        return volume_vrep(poly) if isinstance(poly, PolytopeV) else volume_hrep(poly)
    if isinstance(body, NormBall):
        return estimate_volume(body.gauge, body.dim, half_widths=body.half_widths(),
                               samples=samples, seed=seed)
    inner = volume_vrep(body.inner_polytope(seed=seed)).value
    outer = volume_hrep(body.outer_polytope(seed=seed)).value
    logger.debug(f"quotient ball sandwich: inner {inner:.6g}, outer {outer:.6g}")
    return VolumeEstimate(value=math.sqrt(inner * outer), method=VolumeMethod.POLYTOPE_SANDWICH,
                          inner=inner, outer=outer)


def _segment_length(body: Union[NormBall, QuotientBall]) -> VolumeEstimate:
    if isinstance(body, NormBall):
        return VolumeEstimate.exact(2.0 / float(body.gauge(np.ones((1, 1)))[0]))
    return VolumeEstimate.exact(2.0 * float(body.support(np.ones((1, 1)))[0]))


def ball_volume_mc(norm: UnconditionalNorm, subspace: Optional[SubspaceBasis] = None,
                   samples: int = 20000, seed: int = 0) -> VolumeEstimate:
    """Monte Carlo volume of {x in E : N(x) <= 1} in the orthonormal frame of E."""
    if samples < 10_000:
        raise VolumeEstimateError(f"Monte Carlo volumes need at least 10000 samples, got {samples}")
    ball = NormBall.of_subspace(norm, subspace)
    return estimate_volume(ball.gauge, ball.dim, half_widths=ball.half_widths(), samples=samples, seed=seed)
