"""Numerical checks of the volume/section inequalities for subspaces and quotients.

Every check folds estimation error towards failure: volumes that appear on
the left use their upper side, maximal sections are search lower bounds.
"""

import math
from typing import Optional

import numpy as np
from pydantic import BaseModel
from scipy.spatial import HalfspaceIntersection, QhullError

from lozvol.defaults import setting
from lozvol.errors import BoundCheckReport, DegenerateBodyError, SelectionMethod
from lozvol.linalg_utils import unit_vectors
from lozvol.norms import SubspaceBasis, UnconditionalNorm
from lozvol.isotropy.moments import IsotropyReport, isotropic_body, polytope_of, to_isotropic
from lozvol.isotropy.summing import Pi1Estimate, pi1_lower_bound
from lozvol.pipeline.enclosing import enclose
from lozvol.ui.logging_config import logger
from lozvol.volume.bodies import NormBall, QuotientBall, body_volume
from lozvol.volume.polytopes import PolytopeV, triangulate
from lozvol.volume.sections import max_central_section

THEOREM4_DEFAULT_CONSTANT = 2.0 * math.e * math.sqrt(6.0)
LEMMA3_CONSTANT = 2.0 * math.sqrt(2.0)
HENSLEY_BAND = (0.2, 2.0)


def theorem3_constant(n: int, k: int) -> float:
    return 2.0 * math.e * math.sqrt(6.0 + 3.0 * math.log(n / k))


def check_theorem2(norm: UnconditionalNorm, E: SubspaceBasis,
                   method: SelectionMethod = SelectionMethod.EXACT, seed: int = 0) -> BoundCheckReport:
    """(|absconv{y}| / |B_E|)^(1/k) <= (e n / k)^2 together with the containment check."""
    return enclose(norm, E, method=method, seed=seed, raise_on_violation=False).report


def _section_check(name: str, ball, constant: float, scale: float, seed: int) -> BoundCheckReport:
    """|B|^((k-1)/k) <= constant * scale * sup_H |B ∩ H|."""
    k = ball.dim
    volume = body_volume(ball, seed=seed)
    search = max_central_section(ball, seed=seed)
    lhs = volume.upper() ** ((k - 1) / k)
    rhs = constant * scale * search.value
    min_constant = lhs / (scale * search.value) if search.value > 0 else math.inf
    return BoundCheckReport.compare(
        name, lhs=lhs, rhs=rhs, constant_used=constant, min_constant=min_constant,
        volume=volume.value, volume_method=volume.method.value, max_section=search.value,
        section_direction=search.direction, exact_sections=search.exact_sections,
    )


def check_theorem3(norm: UnconditionalNorm, E: Optional[SubspaceBasis] = None, seed: int = 0) -> BoundCheckReport:
    """|B_E|^((k-1)/k) <= 2e sqrt(6 + 3 ln(n/k)) sup_H |B_E ∩ H|."""
    ball = NormBall.of_subspace(norm, E)
    n, k = norm.dim, ball.dim
    if k == 1:
        return BoundCheckReport.skipped("theorem3", "k = 1: hyperplane sections are points")
    return _section_check("theorem3", ball, theorem3_constant(n, k), 1.0, seed)


def check_theorem4(norm: UnconditionalNorm, quotient, constant: Optional[float] = None,
                   seed: int = 0) -> BoundCheckReport:
    """|B_E|^((k-1)/k) <= C (1 + ln n) sup_H |B_E ∩ H| for B_E the quotient ball."""
    constant = THEOREM4_DEFAULT_CONSTANT if constant is None else constant
    ball = QuotientBall.of_map(norm, quotient)
    n, k = norm.dim, ball.dim
    if k == 1:
        return BoundCheckReport.skipped("theorem4", "k = 1: hyperplane sections are points")
    return _section_check("theorem4", ball, constant, 1.0 + math.log(n), seed)


def check_lemma3(body, isotropy: Optional[IsotropyReport] = None, seed: int = 0) -> tuple[BoundCheckReport, Pi1Estimate]:
    """L_K pi_1 <= 2 sqrt(2) on the isotropic image of `body`."""
    isotropy = to_isotropic(body, seed=seed) if isotropy is None else isotropy
    image = isotropic_body(body, isotropy.matrix)
    estimate = pi1_lower_bound(image, seed=seed)
    lhs = isotropy.L_K * estimate.lower_bound
    report = BoundCheckReport.compare(
        "lemma3", lhs=lhs, rhs=LEMMA3_CONSTANT, tolerance=setting("tolerances.lemma3"),
        L_K=isotropy.L_K, pi1_lower_bound=estimate.lower_bound, witness=estimate.family_name,
    )
    return report, estimate


def _half_body(poly: PolytopeV, alpha: np.ndarray) -> PolytopeV:
    """K ∩ {<x, alpha> >= 0}."""
    normals = poly.hrep.normals
    halfspaces = np.vstack([
        np.hstack([normals, -np.ones((len(normals), 1))]),
        np.hstack([-alpha[None, :], np.zeros((1, 1))]),
    ])
    radial = 1.0 / float(poly.gauge(alpha[None, :])[0])
    interior = 0.5 * radial * alpha
    try:
        hs = HalfspaceIntersection(halfspaces, interior)
    except QhullError as e:
        raise DegenerateBodyError(f"half body is degenerate: {str(e).splitlines()[0]}")
    return PolytopeV(hs.intersections)


def absolute_first_moment(poly: PolytopeV, alpha) -> float:
    """int_K |<x, alpha>| dx for a symmetric polytope K, via the half body."""
    alpha = np.asarray(alpha, dtype=float)
    if poly.dim == 1:
        a = float(np.abs(poly.vertices).max())
        return abs(float(alpha[0])) * a * a
    half = _half_body(poly, alpha)
    simplices, volumes = triangulate(half, center=half.interior_point())
    centroids = simplices.mean(axis=1)
    return 2.0 * float(np.dot(volumes, centroids @ alpha))


def borell_moment_ratio(body, isotropy: Optional[IsotropyReport] = None, directions: Optional[np.ndarray] = None,
                        count: int = 32, seed: int = 0) -> BoundCheckReport:
    """max over directions of L_K ||alpha||_2 / int_K |<x, alpha>| dx, against 2 sqrt(2), on isotropic K."""
    isotropy = to_isotropic(body, seed=seed) if isotropy is None else isotropy
    image = polytope_of(isotropic_body(body, isotropy.matrix))
    if image is None:
        raise DegenerateBodyError("first moments are computed exactly, the body must be a polytope")
    k = image.dim
    if directions is None:
        rng = np.random.default_rng(seed)
        directions = np.vstack([np.eye(k), unit_vectors(rng, count, k)])
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    ratios = [isotropy.L_K * np.linalg.norm(a) / absolute_first_moment(image, a) for a in directions]
    worst = int(np.argmax(ratios))
    return BoundCheckReport.compare(
        "borell_moment", lhs=float(ratios[worst]), rhs=LEMMA3_CONSTANT,
        tolerance=setting("tolerances.lemma3"), worst_direction=directions[worst].tolist(),
        directions=len(directions),
    )


def check_final_remark(K: PolytopeV, norm: UnconditionalNorm, E: Optional[SubspaceBasis] = None,
                       matrix=None, seed: int = 0) -> BoundCheckReport:
    """|K|^((k-1)/k) <= (|B_E| / |K|)^(1/k) 2e sqrt(6 + 3 ln(n/k)) sup_H |K ∩ H| for K ⊆ B_E.

    K is given in the orthonormal frame of E, optionally as A(K).
    """
    if matrix is not None:
        K = K.linear_image(matrix)
    ball = NormBall.of_subspace(norm, E)
    n, k = norm.dim, ball.dim
    if K.dim != k:
        raise DegenerateBodyError(f"body has dimension {K.dim}, E has dimension {k}")
    if k == 1:
        return BoundCheckReport.skipped("final_remark", "k = 1: hyperplane sections are points")
    if float(ball.gauge(K.vertices).max()) > 1.0 + setting("tolerances.containment"):
        raise DegenerateBodyError("body is not contained in B_E")
    body_vol = body_volume(K).value
    ball_vol = body_volume(ball, seed=seed)
    search = max_central_section(K, seed=seed)
    constant = theorem3_constant(n, k)
    lhs = body_vol ** ((k - 1) / k)
    scale = (ball_vol.lower() / body_vol) ** (1.0 / k)
    rhs = scale * constant * search.value
    return BoundCheckReport.compare(
        "final_remark", lhs=lhs, rhs=rhs, constant_used=constant,
        min_constant=lhs / (scale * search.value) if search.value > 0 else math.inf,
        volume_ratio=scale, max_section=search.value,
    )


class HensleyReport(BaseModel):
    L_K: float
    max_section: float
    product: float
    band: tuple[float, float]
    inside: bool


def hensley_band(body, isotropy: Optional[IsotropyReport] = None, seed: int = 0) -> HensleyReport:
    """L_K times the largest central section of the isotropic image; flagged outside [0.2, 2]."""
    isotropy = to_isotropic(body, seed=seed) if isotropy is None else isotropy
    image = isotropic_body(body, isotropy.matrix)
    search = max_central_section(image, seed=seed)
    product = isotropy.L_K * search.value
    inside = HENSLEY_BAND[0] <= product <= HENSLEY_BAND[1]
    if not inside:
        logger.warning(f"L_K * max section = {product:.4g} outside {HENSLEY_BAND}")
    return HensleyReport(L_K=isotropy.L_K, max_section=search.value, product=product,
                         band=HENSLEY_BAND, inside=inside)
