"""Exact geometry of polytopes given by vertices (V-rep) or by facets <a, x> <= 1 (H-rep).

Volumes are computed by triangulating the boundary with qhull and fanning
each boundary simplex from an interior point (the origin for symmetric bodies).
"""

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
from pydantic import BaseModel
from scipy.spatial import ConvexHull, QhullError

from lozvol.defaults import setting
from lozvol.errors import DegenerateBodyError, VolumeEstimateError, VolumeMethod
from lozvol.linalg_utils import sign_vectors


class VolumeEstimate(BaseModel):
    """A volume with its uncertainty.

    Args:
        value: Point estimate.
        method: How it was obtained.
        std_error: Standard error, 0 for exact methods.
        samples: Monte Carlo samples used.
        inner: Certified lower bound (sandwich method).
        outer: Certified upper bound (sandwich method).
    """
    value: float
    method: VolumeMethod
    std_error: float = 0.0
    samples: int = 0
    inner: Optional[float] = None
    outer: Optional[float] = None

    @classmethod
    def exact(cls, value: float, method: VolumeMethod = VolumeMethod.EXACT_TRIANGULATION) -> "VolumeEstimate":
        return cls(value=value, method=method)

    @property
    def relative_error(self) -> float:
        return self.std_error / self.value if self.value > 0 else float("inf")

    def lower(self, sigmas: Optional[float] = None) -> float:
        """Side of the estimate unfavourable to an upper bound on the body."""
        if self.inner is not None:
            return self.inner
        sigmas = setting("tolerances.mc_sigmas") if sigmas is None else sigmas
        return max(self.value - sigmas * self.std_error, 0.0)

    def upper(self, sigmas: Optional[float] = None) -> float:
        if self.outer is not None:
            return self.outer
        sigmas = setting("tolerances.mc_sigmas") if sigmas is None else sigmas
        return self.value + sigmas * self.std_error


def unique_rows(points: np.ndarray, decimals: int = 10) -> np.ndarray:
    """Drop rows equal up to `decimals` relative digits, keeping first occurrences in order."""
    points = np.asarray(points, dtype=float)
    if len(points) == 0:
        return points
    scale = max(np.abs(points).max(), 1e-300)
    _, idx = np.unique(np.round(points / scale, decimals), axis=0, return_index=True)
    return points[np.sort(idx)]


def _hull(points: np.ndarray) -> ConvexHull:
    try:
        return ConvexHull(points)
    except (QhullError, ValueError) as e:
        raise DegenerateBodyError(f"point set does not span R^{points.shape[1]}: {str(e).splitlines()[0]}")


@dataclass(frozen=True, eq=False)
class PolytopeV:
    """conv(vertices) in R^k; rows are points."""
    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] == 0 or v.shape[1] == 0:
            raise DegenerateBodyError(f"expected a non-empty (m, k) vertex array, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DegenerateBodyError("vertices have non-finite entries")
        object.__setattr__(self, "vertices", v)

    @classmethod
    def symmetric(cls, points) -> "PolytopeV":
        """absconv(points)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return cls(unique_rows(np.vstack([points, -points])))

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        v = self.vertices
        scale = max(np.abs(v).max(), 1.0)
        dist = np.abs(v[:, None, :] + v[None, :, :]).max(axis=2).min(axis=1)
        return bool(dist.max() <= tol * scale)

    @cached_property
    def hull(self) -> ConvexHull:
        if self.dim == 1:
            raise DegenerateBodyError("qhull needs dimension >= 2")
        return _hull(self.vertices)

    def extreme(self) -> "PolytopeV":
        """The same body with redundant points removed."""
        if self.dim == 1:
            return PolytopeV(np.array([[self.vertices.min()], [self.vertices.max()]]))
        return PolytopeV(self.vertices[np.sort(self.hull.vertices)])

    def interior_point(self) -> np.ndarray:
        return self.extreme().vertices.mean(axis=0)

    def contains_origin(self, tol: Optional[float] = None) -> bool:
        tol = setting("tolerances.hull") if tol is None else tol
        if self.dim == 1:
            return bool(self.vertices.min() < -tol and self.vertices.max() > tol)
        return bool(np.all(self.hull.equations[:, -1] < -tol))

    @cached_property
    def hrep(self) -> "PolytopeH":
        """Facets as <a, x> <= 1; needs the origin in the interior."""
        if not self.contains_origin():
            raise DegenerateBodyError("origin is not an interior point of the polytope")
        if self.dim == 1:
            return PolytopeH(np.array([[1.0 / self.vertices.max()], [1.0 / self.vertices.min()]]))
        eq = self.hull.equations
        return PolytopeH(unique_rows(eq[:, :-1] / (-eq[:, -1])[:, None]))

    def support(self, directions) -> np.ndarray:
        """h(u) = max_v <v, u> for each row u."""
        u = np.atleast_2d(np.asarray(directions, dtype=float))
        return (u @ self.vertices.T).max(axis=1)

    def gauge(self, points) -> np.ndarray:
        return self.hrep.gauge(points)

    def linear_image(self, matrix) -> "PolytopeV":
        """A(P) for a k' x k matrix A."""
        return PolytopeV(self.vertices @ np.asarray(matrix, dtype=float).T)


@dataclass(frozen=True, eq=False)
class PolytopeH:
    """{x : <a, x> <= 1 for every row a of normals}."""
    normals: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.normals, dtype=float)
        if a.ndim == 1:
            a = a[:, None]
        if a.ndim != 2 or a.shape[0] == 0 or a.shape[1] == 0:
            raise DegenerateBodyError(f"expected a non-empty (m, k) normal array, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise DegenerateBodyError("facet normals have non-finite entries")
        object.__setattr__(self, "normals", a)

    @property
    def dim(self) -> int:
        return self.normals.shape[1]

    def gauge(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.maximum((pts @ self.normals.T).max(axis=1), 0.0)

    def is_bounded(self) -> bool:
        try:
            PolytopeV(self.normals).hrep
        except DegenerateBodyError:
            return False
        return True

    @cached_property
    def vrep(self) -> PolytopeV:
        """Vertices via the polar: facets of conv(normals) are the vertices of this body."""
        try:
            facets = PolytopeV(self.normals).hrep.normals
        except DegenerateBodyError:
            raise DegenerateBodyError("H-polytope is unbounded (normals do not surround the origin)")
        return PolytopeV(facets)

    def support(self, directions) -> np.ndarray:
        return self.vrep.support(directions)

    def linear_image(self, matrix) -> "PolytopeH":
        """A(P) for an invertible A: normals become A^{-T} a."""
        matrix = np.asarray(matrix, dtype=float)
        _check_nonsingular(matrix)
        return PolytopeH(np.linalg.solve(matrix.T, self.normals.T).T)


def cross_polytope(k: int) -> PolytopeV:
    return PolytopeV.symmetric(np.eye(k))


def cube(k: int, half_width: float = 1.0) -> PolytopeV:
    return PolytopeV(half_width * sign_vectors(k))


def triangulate(P: PolytopeV, center: Optional[np.ndarray] = None) -> tuple[np.ndarray, np.ndarray]:
    """Simplices fanned from `center` over the triangulated boundary.

    Returns (simplices, volumes): simplices has shape (m, k+1, k) with the
    center as vertex 0. The center defaults to the origin when it is interior
    and to the vertex mean otherwise.
    """
    k = P.dim
    if center is None:
        center = np.zeros(k) if P.contains_origin() else P.interior_point()
    center = np.asarray(center, dtype=float)
    if k == 1:
        lo, hi = P.vertices.min(), P.vertices.max()
        if hi - lo <= 0:
            raise DegenerateBodyError("segment has zero length")
        simplices = np.array([[center, [lo]], [center, [hi]]])
    else:
        boundary = P.vertices[P.hull.simplices]
        centers = np.broadcast_to(center, (len(boundary), 1, k))
        simplices = np.concatenate([centers, boundary], axis=1)
    edges = simplices[:, 1:, :] - simplices[:, :1, :]
    volumes = np.abs(np.linalg.det(edges)) / math.factorial(k)
    return simplices, volumes


def volume_vrep(P: PolytopeV, max_dim: Optional[int] = None) -> VolumeEstimate:
    """Exact volume of conv(vertices)."""
    max_dim = setting("volume.exact_max_dim") if max_dim is None else max_dim
    if P.dim > max_dim:
        raise VolumeEstimateError(f"exact volumes are limited to dimension {max_dim}, got {P.dim}")
    _, volumes = triangulate(P)
    value = math.fsum(volumes)
    if value <= 0:
        raise DegenerateBodyError("polytope has zero volume")
    return VolumeEstimate.exact(value)


def volume_hrep(H: PolytopeH, max_dim: Optional[int] = None) -> VolumeEstimate:
    return volume_vrep(H.vrep, max_dim=max_dim)


def polar_polytope(P: PolytopeV) -> PolytopeH:
    """P° = {y : <v, y> <= 1 for all vertices v}."""
    if not P.contains_origin():
        raise DegenerateBodyError("polar needs the origin in the interior")
    return PolytopeH(P.extreme().vertices)


def polar_hrep(H: PolytopeH) -> PolytopeV:
    """({x : <a, x> <= 1})° = conv(normals)."""
    if not H.is_bounded():
        raise DegenerateBodyError("polar of an unbounded body is not full-dimensional")
    return PolytopeV(H.normals).extreme()


def _check_nonsingular(matrix: np.ndarray):
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DegenerateBodyError(f"expected a square matrix, got shape {matrix.shape}")
    if np.linalg.matrix_rank(matrix) < matrix.shape[0]:
        raise DegenerateBodyError("matrix is singular")


def cross_polytope_image_volume(matrix) -> float:
    """|A(B_1^k)| = 2^k / k! |det A|."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    _check_nonsingular(matrix)
    k = matrix.shape[0]
    return 2.0 ** k / math.factorial(k) * abs(np.linalg.det(matrix))


def cube_image_volume(matrix) -> float:
    """|A(B_inf^k)| = 2^k |det A|."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    _check_nonsingular(matrix)
    return 2.0 ** matrix.shape[0] * abs(np.linalg.det(matrix))
