"""Hyperplane sections of bodies and a budgeted search for the largest central one."""

from typing import Optional, Union

import numpy as np
import scipy.optimize
from pydantic import BaseModel

from lozvol.defaults import setting
from lozvol.errors import DegenerateBodyError, VolumeMethod
from lozvol.linalg_utils import orthogonal_complement, unit_vectors
from lozvol.ui.logging_config import logger
from lozvol.volume.bodies import Body, NormBall, QuotientBall, body_volume, inner_polytope
from lozvol.volume.polytopes import PolytopeH, PolytopeV, VolumeEstimate, volume_hrep


class SectionSearch(BaseModel):
    """Best central section found.

    `value` is a lower bound on the sup over central hyperplanes; it is the
    exact sup only if the search happened to hit the maximiser.
    """
    direction: list[float]
    value: float
    evaluations: int
    exact_sections: bool
    degenerate: bool = False


def _as_hrep(poly: Union[PolytopeV, PolytopeH]) -> PolytopeH:
    return poly.hrep if isinstance(poly, PolytopeV) else poly


def _unit(u) -> np.ndarray:
    u = np.asarray(u, dtype=float).ravel()
    length = np.linalg.norm(u)
    if length == 0 or not np.isfinite(length):
        raise DegenerateBodyError("section direction must be a non-zero finite vector")
    return u / length


def polytope_section_volume(H: PolytopeH, u) -> float:
    """(k-1)-volume of H ∩ u⊥, measured in an orthonormal frame of u⊥."""
    if H.dim == 1:
        return 0.0
    basis = orthogonal_complement(_unit(u))
    return volume_hrep(PolytopeH(H.normals @ basis)).value


def parallel_section_volume(H: PolytopeH, u, offset: float) -> float:
    """(k-1)-volume of H ∩ {<u, x> = offset}; 0 when the hyperplane misses the interior."""
    u = _unit(u)
    if H.dim == 1:
        return 0.0
    basis = orthogonal_complement(u)
    a = H.normals @ basis
    b = 1.0 - offset * (H.normals @ u)
    # Chebyshev centre of the slice {y : a y <= b}
    m = a.shape[1]
    res = scipy.optimize.linprog(
        c=np.r_[np.zeros(m), -1.0], A_ub=np.c_[a, np.linalg.norm(a, axis=1)], b_ub=b,
        bounds=[(None, None)] * m + [(0.0, None)],
    )
    if res.status != 0 or res.x[-1] <= setting("tolerances.hull") * max(1.0, np.abs(b).max()):
        return 0.0
    slack = b - a @ res.x[:-1]
    return volume_hrep(PolytopeH(a / slack[:, None])).value


def central_section_volume(body: Body, u, samples: Optional[int] = None, seed: int = 0) -> VolumeEstimate:
    """(k-1)-volume of body ∩ u⊥.

    Exact for polytopes, Monte Carlo for non-polytopal subspace balls and a
    polytope sandwich for non-polytopal quotient balls. k = 1 gives 0.
    """
    u = _unit(u)
    if len(u) != body.dim:
        raise DegenerateBodyError(f"direction has length {len(u)}, body lives in R^{body.dim}")
    if body.dim == 1:
        return VolumeEstimate.exact(0.0)
    if isinstance(body, (PolytopeV, PolytopeH)) or body.is_polytopal:
        return VolumeEstimate.exact(polytope_section_volume(_as_hrep(inner_polytope(body)), u))
    basis = orthogonal_complement(u)
    if isinstance(body, NormBall):
        return body_volume(body.section(basis), samples=samples, seed=seed)
    inner = polytope_section_volume(body.inner_polytope(seed=seed).hrep, u)
    outer = polytope_section_volume(body.outer_polytope(seed=seed), u)
    return VolumeEstimate(value=float(np.sqrt(inner * outer)), method=VolumeMethod.POLYTOPE_SANDWICH,
                          inner=inner, outer=outer)


def max_central_section(body: Body, random_directions: Optional[int] = None,
                        refine_iterations: Optional[int] = None, initial_step: Optional[float] = None,
                        seed: int = 0) -> SectionSearch:
    """Search coordinate and random directions, then refine by coordinate ascent on the sphere.

    Non-polytopal bodies are searched on an inscribed polytope, so the
    returned value never exceeds the true sup.
    """
    random_directions = setting("sections.random_directions") if random_directions is None else random_directions
    refine_iterations = setting("sections.refine_iterations") if refine_iterations is None else refine_iterations
    step = setting("sections.initial_step") if initial_step is None else initial_step
    k = body.dim
    exact = isinstance(body, (PolytopeV, PolytopeH)) or body.is_polytopal
    if k == 1:
        return SectionSearch(direction=[1.0], value=0.0, evaluations=0, exact_sections=exact, degenerate=True)

    H = _as_hrep(inner_polytope(body, seed=seed))
    rng = np.random.default_rng(seed)
    candidates = np.vstack([np.eye(k), unit_vectors(rng, random_directions, k)])
    values = [polytope_section_volume(H, u) for u in candidates]
    evaluations = len(values)
    best_idx = int(np.argmax(values))
    best_u, best = candidates[best_idx], values[best_idx]

    for _ in range(refine_iterations):
        improved = False
        for j in range(k):
            for sign in (1.0, -1.0):
                trial = best_u.copy()
                trial[j] += sign * step
                trial /= np.linalg.norm(trial)
                value = polytope_section_volume(H, trial)
                evaluations += 1
                if value > best:
                    best_u, best, improved = trial, value, True
        if not improved:
            step *= 0.5
    logger.debug(f"max central section {best:.6g} after {evaluations} evaluations")
    return SectionSearch(direction=best_u.tolist(), value=float(best), evaluations=evaluations,
                         exact_sections=exact)
