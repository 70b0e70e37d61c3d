"""Second moments, isotropic position and the isotropy constant L_K."""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg
from pydantic import BaseModel

from lozvol.defaults import setting
from lozvol.errors import DegenerateBodyError, VolumeEstimateError
from lozvol.ui.logging_config import logger
from lozvol.volume.bodies import NormBall, QuotientBall, sandwich_directions
from lozvol.volume.montecarlo import estimate_volume, hit_and_run, radial_second_moment
from lozvol.volume.polytopes import PolytopeH, PolytopeV, VolumeEstimate, triangulate


@dataclass(frozen=True, eq=False)
class LinearImage:
    """A(K) for a body K known through its gauge."""
    body: object
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_polytopal(self) -> bool:
        return False

    def gauge(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return self.body.gauge(np.linalg.solve(self.matrix, pts.T).T)

    def radius(self) -> float:
        return float(np.linalg.norm(self.matrix, 2) * self.body.radius())

    def inner_polytope(self, count: Optional[int] = None, seed: int = 0) -> PolytopeV:
        count = setting("volume.sandwich_directions") if count is None else count
        u = sandwich_directions(self.dim, count, seed)
        return PolytopeV(u / self.gauge(u)[:, None])


class SecondMoments(BaseModel):
    """int_K x x^T dx with |K| and their uncertainties."""
    volume: VolumeEstimate
    moment: list[list[float]]
    std_error: list[list[float]]
    exact: bool

    @property
    def matrix(self) -> np.ndarray:
        return np.asarray(self.moment)


class IsotropyReport(BaseModel):
    """A(K) is isotropic: |A(K)| = 1 and int_{A(K)} x x^T dx = L_K^2 I.

    Args:
        affine_map: A.
        inverse_map: A^{-1}.
        L_K: isotropy constant.
        cov_residual: max |cov_ij - L_K^2 delta_ij| recomputed on A(K).
        volume_check: ||A(K)| - 1|.
        cov_std_error: largest standard error of the recomputed covariance (0 when exact).
        volume_std_error: standard error of |A(K)| (0 when exact).
    """
    affine_map: list[list[float]]
    inverse_map: list[list[float]]
    L_K: float
    cov_residual: float
    volume_check: float
    cov_std_error: float = 0.0
    volume_std_error: float = 0.0
    exact: bool

    @property
    def matrix(self) -> np.ndarray:
        return np.asarray(self.affine_map)

    @property
    def within_tolerance(self) -> bool:
        if self.exact:
            return self.cov_residual <= 1e-6 and self.volume_check <= setting("tolerances.isotropy_exact")
        sigmas = setting("tolerances.mc_sigmas")
        return (self.cov_residual <= sigmas * self.cov_std_error
                and self.volume_check <= sigmas * self.volume_std_error)


def polytope_of(body) -> Optional[PolytopeV]:
    """V-rep of a polytopal body, None for bodies known only through their gauge."""
    if isinstance(body, PolytopeV):
        return body
    if isinstance(body, PolytopeH):
        return body.vrep
    if isinstance(body, (NormBall, QuotientBall)) and body.is_polytopal:
        poly = body.polytope
        return poly if isinstance(poly, PolytopeV) else poly.vrep
    return None


def simplex_second_moments(simplices: np.ndarray, volumes: np.ndarray) -> np.ndarray:
    """int_S x x^T = vol(S) / ((k+1)(k+2)) (sum_i v_i v_i^T + s s^T), s = sum_i v_i, summed over simplices."""
    k = simplices.shape[2]
    sums = simplices.sum(axis=1)
    outer = np.einsum("mik,mil->mkl", simplices, simplices) + np.einsum("mk,ml->mkl", sums, sums)
    weights = volumes / ((k + 1) * (k + 2))
    return np.einsum("m,mkl->kl", weights, outer)


def second_moments(body, samples: Optional[int] = None, seed: int = 0,
                   mc_method: str = "radial") -> SecondMoments:
    """Exact for polytopes; Monte Carlo (radial integration or hit-and-run) for gauge bodies."""
    poly = polytope_of(body)
    if poly is not None:
        simplices, volumes = triangulate(poly)
        volume = math.fsum(volumes)
        if volume <= 0:
            raise DegenerateBodyError("body has zero volume")
        moment = simplex_second_moments(simplices, volumes)
        zeros = np.zeros_like(moment)
        return SecondMoments(volume=VolumeEstimate.exact(volume), moment=moment.tolist(),
                             std_error=zeros.tolist(), exact=True)
    if not hasattr(body, "gauge") or isinstance(body, QuotientBall):
        raise VolumeEstimateError(f"no Monte Carlo path for {type(body).__name__}")

    samples = setting("volume.mc_samples") if samples is None else samples
    k = body.dim
    volume = estimate_volume(body.gauge, k, samples=samples, seed=seed)
    if mc_method == "radial":
        moment, std_error = radial_second_moment(body.gauge, k, volume.samples, seed + 1)
    elif mc_method == "hit-and-run":
        points = hit_and_run(body.gauge, k, body.radius(), volume.samples, seed + 1)
        products = (points[:, :, None] * points[:, None, :]).reshape(len(points), k * k)
        moment = volume.value * products.mean(axis=0).reshape(k, k)
        std_error = volume.value * products.std(axis=0, ddof=1).reshape(k, k) / math.sqrt(len(points))
    else:
        raise ValueError(f"unknown Monte Carlo method {mc_method!r}")
    return SecondMoments(volume=volume, moment=moment.tolist(), std_error=std_error.tolist(), exact=False)


def covariance(body, samples: Optional[int] = None, seed: int = 0) -> np.ndarray:
    """int_K x x^T dx."""
    return second_moments(body, samples=samples, seed=seed).matrix


def isotropic_body(body, matrix: np.ndarray):
    """A(K) as a polytope when K is one, as a LinearImage otherwise."""
    poly = polytope_of(body)
    if poly is not None:
        return poly.linear_image(matrix)
    return LinearImage(body, np.asarray(matrix, dtype=float))


def to_isotropic(body, samples: Optional[int] = None, seed: int = 0) -> IsotropyReport:
    """A = L_K Sigma^{-1/2} with Sigma = int_K x x^T / |K| and L_K = det(Sigma)^(1/2k) / |K|^(1/k)."""
    moments = second_moments(body, samples=samples, seed=seed)
    k = body.dim
    volume = moments.volume.value
    sigma = moments.matrix / volume
    sigma = 0.5 * (sigma + sigma.T)
    eigenvalues, eigenvectors = scipy.linalg.eigh(sigma)
    if eigenvalues.min() <= 1e-14 * max(eigenvalues.max(), 1e-300):
        raise DegenerateBodyError("covariance is not positive definite")
    inv_sqrt = (eigenvectors / np.sqrt(eigenvalues)) @ eigenvectors.T
    L = math.exp(0.5 * np.log(eigenvalues).sum() / k) / volume ** (1.0 / k)
    matrix = L * inv_sqrt
    inverse = (eigenvectors * np.sqrt(eigenvalues)) @ eigenvectors.T / L

    image = isotropic_body(body, matrix)
    check = second_moments(image, samples=samples, seed=seed + 2)
    cov_residual = float(np.abs(check.matrix - L ** 2 * np.eye(k)).max())
    volume_check = abs(check.volume.value - 1.0)
    logger.debug(f"isotropic position: L_K = {L:.9g}, cov residual {cov_residual:.2e}, "
                 f"volume residual {volume_check:.2e}")
    return IsotropyReport(
        affine_map=matrix.tolist(), inverse_map=inverse.tolist(), L_K=L,
        cov_residual=cov_residual, volume_check=volume_check,
        cov_std_error=float(np.max(check.std_error)), volume_std_error=check.volume.std_error,
        exact=moments.exact,
    )
