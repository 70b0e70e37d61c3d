"""The cross-polytope absconv{y_1..y_k} ⊇ B_E and the inscribed cube of a quotient.

For sigma from the subset selection, ||z||_sigma = sum_{j in sigma} |<z, x_j>|
dominates ||.||_1 on H, so B_1^n ∩ H ⊆ B_sigma = X_sigma^{-T}(B_1^k). Pulling
the k vertices of B_sigma back through S = T^{-1} gives points of E whose
absolute convex hull contains T^{-1}(B_1^n) ∩ E ⊇ B_E.
"""

import math
from typing import Optional

import numpy as np
from pydantic import BaseModel

from lozvol.defaults import setting
from lozvol.errors import BoundCheckReport, BoundViolationError, RankDeficiencyError, SelectionMethod, Verdict
from lozvol.linalg_utils import cross_polytope_volume, cube_volume, unit_vectors
from lozvol.lozanovskii import build_embedding, solve_weights
from lozvol.norms import LpNorm, SubspaceBasis, UnconditionalNorm
from lozvol.pipeline.embedding import EmbeddingMaps, ProjectionFrame, embed_subspace
from lozvol.pipeline.subsets import SubsetSelection, polar_zonotope_volume, select_max_det_subset
from lozvol.ui.logging_config import logger
from lozvol.volume.bodies import NormBall, QuotientBall, body_volume
from lozvol.volume.polytopes import VolumeEstimate


def theorem2_bound(n: int, k: int) -> float:
    return (math.e * n / k) ** 2


class EnclosingCrossPolytope(BaseModel):
    """absconv{y_1..y_k} with B_E inside it.

    Args:
        vertices: y_1..y_k in ambient coordinates of R^n (points of E).
        frame_coords: k x k matrix whose column r is y_r in the orthonormal frame of E.
        absconv_volume: 2^k / k! |det frame_coords|.
        ball_volume: |B_E| in the same frame.
        ratio: (absconv_volume / |B_E|)^(1/k), with |B_E| on its lower side.
        bound: (e n / k)^2.
        containment_max_gauge: Largest gauge of absconv over the boundary samples of B_E.
    """
    vertices: list[list[float]]
    frame_coords: list[list[float]]
    absconv_volume: float
    ball_volume: VolumeEstimate
    ratio: float
    bound: float
    containment_max_gauge: float
    containment_samples: int
    selection: SubsetSelection
    report: BoundCheckReport


def cross_polytope_vertices(frame: ProjectionFrame, maps: EmbeddingMaps, sel: SubsetSelection) -> np.ndarray:
    """n x k matrix with columns y_r = S H^T X_sigma^{-T} e_r."""
    x_sigma = frame.x[:, sel.sigma]
    z = np.linalg.inv(x_sigma).T
    return maps.s[:, None] * (frame.h.T @ z)


def _boundary_points(ball: NormBall, samples: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    u = unit_vectors(rng, samples, ball.dim)
    points = u / ball.gauge(u)[:, None]
    if ball.is_polytopal and ball.dim >= 2 and ball.dim <= setting("volume.exact_max_dim"):
        points = np.vstack([points, ball.polytope.vrep.vertices])
    return points


def absconv_gauge(frame_coords: np.ndarray, points: np.ndarray) -> np.ndarray:
    """||C^{-1} p||_1, the gauge of absconv of the columns of C."""
    coeffs = np.linalg.lstsq(frame_coords, np.atleast_2d(points).T, rcond=None)[0]
    return np.abs(coeffs).sum(axis=0)


def build_enclosing_polytope(norm: UnconditionalNorm, E: SubspaceBasis, maps: EmbeddingMaps,
                             frame: ProjectionFrame, sel: SubsetSelection,
                             samples: Optional[int] = None, seed: int = 0,
                             raise_on_violation: bool = True) -> EnclosingCrossPolytope:
    """Cross-polytope around B_E with the certified volume ratio."""
    samples = setting("containment.boundary_samples") if samples is None else samples
    tolerance = setting("tolerances.containment")
    n, k = E.ambient_dim, E.sub_dim
    if len(sel.sigma) != k:
        raise RankDeficiencyError(f"selection has {len(sel.sigma)} indices, E has dimension {k}")

    ambient = cross_polytope_vertices(frame, maps, sel)
    ball = NormBall.of_subspace(norm, E)
    coords = ball.frame.T @ ambient
    absconv = cross_polytope_volume(k) * abs(np.linalg.det(coords))
    ball_volume = body_volume(ball, seed=seed)
    ratio = (absconv / ball_volume.lower()) ** (1.0 / k)
    bound = theorem2_bound(n, k)

    max_gauge = float(absconv_gauge(coords, _boundary_points(ball, samples, seed)).max())
    report = BoundCheckReport.compare(
        "theorem2", lhs=ratio, rhs=bound, tolerance=0.0,
        min_constant=ratio / (n / k) ** 2,
        containment_max_gauge=max_gauge, volume_method=ball_volume.method.value,
    )
    if max_gauge > 1.0 + tolerance:
        report = report.model_copy(update={"verdict": Verdict.FAIL})
    logger.debug(f"enclosing cross-polytope: ratio {ratio:.6g} <= {bound:.6g}, max gauge {max_gauge:.9f}")

    result = EnclosingCrossPolytope(
        vertices=ambient.T.tolist(), frame_coords=coords.tolist(), absconv_volume=absconv,
        ball_volume=ball_volume, ratio=ratio, bound=bound, containment_max_gauge=max_gauge,
        containment_samples=samples, selection=sel, report=report,
    )
    if raise_on_violation and not report.passed:
        raise BoundViolationError(
            f"enclosing cross-polytope violates its guarantee (ratio {ratio:.6g}, bound {bound:.6g}, "
            f"max gauge {max_gauge:.9f})", report,
        )
    return result


def enclose(norm: UnconditionalNorm, E: SubspaceBasis,
            method: SelectionMethod = SelectionMethod.EXACT, seed: int = 0,
            raise_on_violation: bool = True) -> EnclosingCrossPolytope:
    """Weights, embedding, selection and enclosing polytope in one call."""
    maps = build_embedding(solve_weights(norm), norm)
    frame = embed_subspace(E, maps)
    sel = select_max_det_subset(frame, method=method)
    return build_enclosing_polytope(norm, E, maps, frame, sel, seed=seed,
                                    raise_on_violation=raise_on_violation)


def lemma2_ratio(norm: UnconditionalNorm, E: SubspaceBasis, maps: EmbeddingMaps,
                 seed: int = 0) -> BoundCheckReport:
    """(|T^{-1}(B_1^n) ∩ E| / |B_E|)^(1/k) <= e n / k.

    T^{-1}(B_1^n) ∩ E is the section of the l_1 ball with weights T_diag,
    so its volume is exact.
    """
    n, k = E.ambient_dim, E.sub_dim
    frame = E.orthonormal_frame()
    pulled_back = body_volume(NormBall(LpNorm(p=1.0, weights=maps.T_diag), frame))
    ball_volume = body_volume(NormBall(norm, frame), seed=seed)
    lhs = (pulled_back.value / ball_volume.lower()) ** (1.0 / k)
    return BoundCheckReport.compare(
        "lemma2", lhs=lhs, rhs=math.e * n / k, tolerance=0.0,
        min_constant=lhs * k / n,
        intermediate_bound=n / math.factorial(k) ** (1.0 / k),
        volume_method=ball_volume.method.value,
    )


def _section_volume(p: float, frame: ProjectionFrame) -> float:
    return body_volume(NormBall(LpNorm.standard(p, frame.n), frame.h.T)).value


def check_section_ratio(frame: ProjectionFrame) -> BoundCheckReport:
    """(|H ∩ B_1^n| / |H ∩ B_inf^n|)^(1/k) <= (|B_1^k| / |B_inf^k|)^(1/k)."""
    k = frame.k
    l1 = _section_volume(1.0, frame)
    linf = _section_volume(math.inf, frame)
    lhs = (l1 / linf) ** (1.0 / k)
    rhs = (cross_polytope_volume(k) / cube_volume(k)) ** (1.0 / k)
    return BoundCheckReport.compare("section_ratio", lhs=lhs, rhs=rhs,
                                    tolerance=setting("tolerances.identity"),
                                    l1_section=l1, linf_section=linf)


def check_zonoid_santalo(frame: ProjectionFrame) -> BoundCheckReport:
    """|B_1^k| |B_inf^k| <= |B_1^n ∩ H| |(B_1^n ∩ H)°|, the polar volume from the determinant sum."""
    k = frame.k
    section = _section_volume(1.0, frame)
    polar = polar_zonotope_volume(frame)
    return BoundCheckReport.compare("zonoid_santalo", lhs=cross_polytope_volume(k) * cube_volume(k),
                                    rhs=section * polar, tolerance=setting("tolerances.identity"),
                                    section_volume=section, polar_volume=polar)


def check_binomial_step(frame: ProjectionFrame, sel: SubsetSelection) -> BoundCheckReport:
    """|B_sigma| / |B_1^n ∩ H| <= C(n, k) for the max-determinant sigma."""
    k, n = frame.k, frame.n
    b_sigma = cross_polytope_volume(k) / sel.abs_det
    section = _section_volume(1.0, frame)
    return BoundCheckReport.compare("binomial_step", lhs=b_sigma / section, rhs=float(math.comb(n, k)),
                                    tolerance=setting("tolerances.identity"),
                                    sigma_ball_volume=b_sigma, section_volume=section)


class QuotientCubeReport(BaseModel):
    """Parallelepiped C = A(B_inf^k) inside the quotient ball B_E.

    Args:
        frame: n x k orthonormal basis of range(Q^T); quotient coordinates are taken in it.
        cube_map: k x k matrix A.
        cube_volume: |C| = 2^k |det A|.
        ball_volume: |B_E|.
        ratio: (|B_E| / |C|)^(1/k), with |B_E| on its upper side.
        bound: (e n / k)^2.
        measured_constant: ratio / (n / k)^2.
    """
    frame: list[list[float]]
    cube_map: list[list[float]]
    cube_volume: float
    ball_volume: VolumeEstimate
    ratio: float
    bound: float
    measured_constant: float
    enclosing: EnclosingCrossPolytope
    report: BoundCheckReport


def quotient_cube(norm: UnconditionalNorm, quotient, method: SelectionMethod = SelectionMethod.EXACT,
                  seed: int = 0) -> QuotientCubeReport:
    """Dualise, enclose the dual ball by a cross-polytope, polarise it into a cube inside B_E."""
    q = np.atleast_2d(np.asarray(quotient, dtype=float))
    if q.shape[1] != norm.dim:
        raise RankDeficiencyError(f"quotient map has {q.shape[1]} columns, norm lives in R^{norm.dim}")
    if np.linalg.matrix_rank(q) < q.shape[0]:
        raise RankDeficiencyError("quotient not surjective")
    ball = QuotientBall.projected(norm, q)
    n, k = norm.dim, ball.dim
    dual = norm.dual()
    dual_subspace = SubspaceBasis(basis=ball.frame.T.tolist())
    enclosing = enclose(dual, dual_subspace, method=method, seed=seed)

    coords = np.asarray(enclosing.frame_coords)
    # polar of absconv{c_r} is {z : |<c_r, z>| <= 1} = C^{-T}(B_inf^k)
    cube_map = np.linalg.inv(coords).T
    cube = cube_volume(k) / abs(np.linalg.det(coords))
    ball_volume = body_volume(ball, seed=seed)
    ratio = (ball_volume.upper() / cube) ** (1.0 / k)
    bound = theorem2_bound(n, k)
    measured = ratio / (n / k) ** 2
    report = BoundCheckReport.compare("quotient_cube", lhs=ratio, rhs=bound, tolerance=0.0,
                                      min_constant=measured, volume_method=ball_volume.method.value)
    return QuotientCubeReport(
        frame=ball.frame.tolist(), cube_map=cube_map.tolist(), cube_volume=cube, ball_volume=ball_volume,
        ratio=ratio, bound=bound, measured_constant=measured, enclosing=enclosing, report=report,
    )
