"""Monte Carlo volumes and moments of bodies known through their gauge.

Every estimator splits its samples into a fixed number of independent
streams (spawned from one SeedSequence) so that results depend on the seed
only, never on the thread count.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional

import numpy as np

from lozvol import config
from lozvol.defaults import setting
from lozvol.errors import VolumeEstimateError, VolumeMethod
from lozvol.linalg_utils import unit_ball_volume, unit_vectors
from lozvol.ui.logging_config import logger
from lozvol.volume.polytopes import VolumeEstimate

Gauge = Callable[[np.ndarray], np.ndarray]

STREAMS = 8


def _stream_sizes(samples: int) -> list[int]:
    base, extra = divmod(samples, STREAMS)
    return [base + (1 if i < extra else 0) for i in range(STREAMS)]


def _run_streams(work: Callable[[np.random.Generator, int], np.ndarray], samples: int, seed: int) -> np.ndarray:
    """Run `work(rng, count)` on every stream and concatenate in stream order."""
    children = np.random.SeedSequence(seed).spawn(STREAMS)
    sizes = _stream_sizes(samples)
    jobs = [(np.random.default_rng(child), size) for child, size in zip(children, sizes) if size > 0]
    threads = min(config.get_threads(), len(jobs))
    if threads <= 1:
        parts = [work(rng, size) for rng, size in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda job: work(*job), jobs))
    return np.concatenate(parts, axis=0)


def rejection_volume(gauge: Gauge, half_widths: np.ndarray, samples: int, seed: int) -> VolumeEstimate:
    """Hit rate of uniform points in the box prod [-w_j, w_j] times the box volume."""
    half_widths = np.asarray(half_widths, dtype=float)
    k = len(half_widths)
    box = float(np.prod(2.0 * half_widths))

    def work(rng: np.random.Generator, count: int) -> np.ndarray:
        pts = rng.uniform(-1.0, 1.0, size=(count, k)) * half_widths
        return gauge(pts) <= 1.0

    hits = _run_streams(work, samples, seed)
    rate = float(hits.mean())
    std_error = box * math.sqrt(rate * (1.0 - rate) / samples)
    return VolumeEstimate(value=rate * box, method=VolumeMethod.MONTE_CARLO,
                          std_error=std_error, samples=samples)


def radial_volume(gauge: Gauge, dim: int, samples: int, seed: int) -> VolumeEstimate:
    """|K| = |B_2^k| E[rho(u)^k], u uniform on the sphere, rho = 1 / gauge."""

    def work(rng: np.random.Generator, count: int) -> np.ndarray:
        u = unit_vectors(rng, count, dim)
        return gauge(u) ** (-float(dim))

    values = _run_streams(work, samples, seed)
    ball = unit_ball_volume(dim)
    std_error = ball * float(values.std(ddof=1)) / math.sqrt(samples) if samples > 1 else float("inf")
    return VolumeEstimate(value=ball * float(values.mean()), method=VolumeMethod.MONTE_CARLO,
                          std_error=std_error, samples=samples)


def estimate_volume(gauge: Gauge, dim: int, half_widths: Optional[np.ndarray] = None,
                    samples: Optional[int] = None, seed: int = 0,
                    max_samples: Optional[int] = None, max_rel_error: Optional[float] = None,
                    switch_acceptance: Optional[float] = None) -> VolumeEstimate:
    """Adaptive estimate: rejection sampling in the box, radial integration when the box is too loose.

    The sample count grows by 4x until std_error / value <= max_rel_error.
    """
    samples = setting("volume.mc_samples") if samples is None else samples
    max_samples = setting("volume.mc_max_samples") if max_samples is None else max_samples
    max_rel_error = setting("volume.mc_max_rel_error") if max_rel_error is None else max_rel_error
    switch_acceptance = setting("volume.mc_switch_acceptance") if switch_acceptance is None else switch_acceptance
    if samples < 2:
        raise VolumeEstimateError(f"need at least 2 samples, got {samples}")

    use_radial = half_widths is None
    if not use_radial:
        half_widths = np.asarray(half_widths, dtype=float)
        if half_widths.shape != (dim,) or np.any(~np.isfinite(half_widths)) or np.any(half_widths <= 0):
            raise VolumeEstimateError("bounding box is unobtainable for this body")

    count = samples
    while True:
        if use_radial:
            est = radial_volume(gauge, dim, count, seed)
        else:
            est = rejection_volume(gauge, half_widths, count, seed)
            box = float(np.prod(2.0 * half_widths))
            if est.value / box < switch_acceptance:
                logger.debug(f"acceptance {est.value / box:.2e} below {switch_acceptance:.0e}, "
                             f"switching to radial integration")
                use_radial = True
                continue
        if est.relative_error <= max_rel_error:
            return est
        if count >= max_samples:
            raise VolumeEstimateError(
                f"relative error {est.relative_error:.3g} above {max_rel_error} after {count} samples"
            )
        count = min(4 * count, max_samples)


def radial_second_moment(gauge: Gauge, dim: int, samples: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """int_K x x^T dx = k |B_2^k| / (k+2) E[rho(u)^(k+2) u u^T]; returns (moment, std_error)."""

    def work(rng: np.random.Generator, count: int) -> np.ndarray:
        u = unit_vectors(rng, count, dim)
        rho = gauge(u) ** -1.0
        weights = rho ** (dim + 2)
        return (weights[:, None, None] * u[:, :, None] * u[:, None, :]).reshape(count, dim * dim)

    values = _run_streams(work, samples, seed)
    factor = dim * unit_ball_volume(dim) / (dim + 2)
    moment = factor * values.mean(axis=0).reshape(dim, dim)
    std_error = factor * values.std(axis=0, ddof=1).reshape(dim, dim) / math.sqrt(samples)
    return moment, std_error


def _chord(gauge: Gauge, x: np.ndarray, d: np.ndarray, radius: float, iterations: int = 60) -> np.ndarray:
    """Largest t >= 0 with gauge(x + t d) <= 1, by bisection (row-wise)."""
    lo = np.zeros(len(x))
    hi = np.full(len(x), 2.0 * radius)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        inside = gauge(x + mid[:, None] * d) <= 1.0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return lo


def hit_and_run(gauge: Gauge, dim: int, radius: float, samples: int, seed: int,
                chains: int = 64, burn_in: int = 200, thin: int = 5) -> np.ndarray:
    """Approximately uniform points in {x : gauge(x) <= 1}.

    `radius` must bound the Euclidean norm of every point of the body.
    Chains start at the origin and move along uniformly random lines.
    """
    if samples < 1:
        raise VolumeEstimateError(f"samples must be >= 1, got {samples}")
    rng = np.random.default_rng(seed)
    x = np.zeros((chains, dim))
    per_chain = -(-samples // chains)
    out = []
    for step in range(burn_in + per_chain * thin):
        d = unit_vectors(rng, chains, dim)
        t_plus = _chord(gauge, x, d, radius)
        t_minus = _chord(gauge, x, -d, radius)
        t = rng.uniform(-t_minus, t_plus)
        x = x + t[:, None] * d
        if step >= burn_in and (step - burn_in) % thin == 0:
            out.append(x.copy())
    return np.concatenate(out, axis=0)[:samples]
