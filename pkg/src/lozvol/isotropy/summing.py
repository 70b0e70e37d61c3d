"""Lower bounds on the 1-summing norm of the formal identity l_2^k -> (R^k, ||.||_K), dualised.

For any finite family (alpha_j),

    pi_1 >= sum_j ||alpha_j||_2 / sup_{||y||_K <= 1} sum_j |<y, alpha_j>|,

so the best ratio over a few candidate families is a lower bound.
"""

from typing import Optional

import numpy as np
from pydantic import BaseModel

from lozvol.defaults import setting
from lozvol.linalg_utils import unit_vectors
from lozvol.isotropy.moments import polytope_of


class Pi1Estimate(BaseModel):
    lower_bound: float
    witness_family: list[list[float]]
    family_size: int
    family_name: str
    sup_value: float
    families_tried: int


def _objective(points: np.ndarray, family: np.ndarray) -> np.ndarray:
    return np.abs(points @ family.T).sum(axis=1)


def family_sup(body, family, directions: Optional[int] = None, refine_iterations: Optional[int] = None,
               seed: int = 0) -> float:
    """sup_{y in K} sum_j |<y, alpha_j>|.

    Exact (max over vertices) for polytopes. Otherwise sampled directions
    scaled to the boundary by the gauge, then coordinate ascent on the sphere.
    """
    family = np.atleast_2d(np.asarray(family, dtype=float))
    poly = polytope_of(body)
    if poly is not None:
        return float(_objective(poly.vertices, family).max())

    directions = setting("pi1.directions") if directions is None else directions
    refine_iterations = setting("pi1.refine_iterations") if refine_iterations is None else refine_iterations
    k = body.dim
    rng = np.random.default_rng(seed)
    u = np.vstack([np.eye(k), -np.eye(k), unit_vectors(rng, directions, k)])

    def ratio(points: np.ndarray) -> np.ndarray:
        return _objective(points, family) / body.gauge(points)

    values = ratio(u)
    best_idx = int(np.argmax(values))
    best_u, best = u[best_idx], float(values[best_idx])
    step = 0.25
    for _ in range(refine_iterations):
        trials = np.repeat(best_u[None, :], 2 * k, axis=0)
        trials[np.arange(k), np.arange(k)] += step
        trials[k + np.arange(k), np.arange(k)] -= step
        trials /= np.linalg.norm(trials, axis=1)[:, None]
        trial_values = ratio(trials)
        idx = int(np.argmax(trial_values))
        if trial_values[idx] > best:
            best_u, best = trials[idx], float(trial_values[idx])
        else:
            step *= 0.5
    return best


def family_ratio(body, family, seed: int = 0) -> tuple[float, float]:
    """(sum ||alpha_j||_2 / sup, sup) for one family."""
    family = np.atleast_2d(np.asarray(family, dtype=float))
    sup = family_sup(body, family, seed=seed)
    return float(np.linalg.norm(family, axis=1).sum() / sup), sup


def candidate_families(body, seed: int = 0, multipliers: Optional[list[int]] = None) -> dict[str, np.ndarray]:
    """Standard basis, {e_1}, Gaussian families of sizes m k and facet normals for polytopes."""
    multipliers = setting("pi1.family_multipliers") if multipliers is None else multipliers
    k = body.dim
    rng = np.random.default_rng(seed)
    families = {"standard": np.eye(k), "e1": np.eye(k)[:1]}
    for m in multipliers:
        families[f"gaussian-{m * k}"] = rng.standard_normal((m * k, k))
    poly = polytope_of(body)
    if poly is not None and k >= 2:
        families["facets"] = poly.hrep.normals
    return families


def pi1_lower_bound(body, families: Optional[dict[str, np.ndarray]] = None, seed: int = 0) -> Pi1Estimate:
    """Best ratio over the candidate families plus any extra families given."""
    candidates = candidate_families(body, seed=seed)
    if families:
        candidates.update({f"extra-{name}": np.atleast_2d(np.asarray(f, dtype=float))
                           for name, f in families.items()})
    best = None
    for name, family in candidates.items():
        value, sup = family_ratio(body, family, seed=seed)
        if best is None or value > best[0]:
            best = (value, sup, name, family)
    value, sup, name, family = best
    return Pi1Estimate(lower_bound=value, witness_family=family.tolist(), family_size=len(family),
                       family_name=name, sup_value=sup, families_tried=len(candidates))
