"""Lozanovskii weights.

For a 1-unconditional norm N on R^n there are positive weights lambda with

    (1/n) ||a||_1  <=  N(lambda * a)  <=  ||a||_inf      for all a.

They are the maximiser of sum log lambda_i over the positive part of the
unit ball. For grammar norms the maximiser is computed exactly, block by
block. The general route writes lambda = e^mu / N(e^mu), which turns the
problem into the unconstrained concave  F(mu) = sum mu - n log N(e^mu),  and
runs steepest ascent with the minimum-norm element of the
eps-superdifferential of F.
"""

from typing import Optional

import numpy as np
import scipy.optimize
from pydantic import BaseModel

from lozvol.ccl_log import get_logger
from lozvol.defaults import setting
from lozvol.errors import BoundViolationError, ConvergenceError, NormError
from lozvol.linalg_utils import sign_vectors
from lozvol.norms import UnconditionalNorm
from lozvol.pipeline.embedding import EmbeddingMaps
from lozvol.ui.logging_config import logger

SOLVER_METHODS = ("structural", "ascent")


class LozanovskiiCertificate(BaseModel):
    """Weights with their verification residuals.

    Args:
        weights: lambda, all positive.
        objective: sum log lambda_i.
        norm_of_lambda: N(lambda), at most 1.
        lower_residual: Worst violation of the left inequality on the check set.
        kkt_residual: ||1 - n lambda * g||_inf for the best subgradient g.
        duality_gap: n log(N*(1/lambda) / n), a bound on the distance to the optimal objective.
        iterations: Ascent steps taken.
        stop_reason: "kkt", "stall" or "closed-form".
    """
    weights: list[float]
    objective: float
    norm_of_lambda: float
    lower_residual: float
    kkt_residual: float
    duality_gap: float = 0.0
    iterations: int
    stop_reason: str

    @property
    def lam(self) -> np.ndarray:
        return np.asarray(self.weights)


class CertificateReport(BaseModel):
    left_ratio: float
    right_ratio: float
    checked: int
    sign_vertices: bool
    tolerance: float
    passed: bool


def _min_norm_direction(lam: np.ndarray, gens: np.ndarray) -> np.ndarray:
    """min ||1 - n lam * g|| over g in the convex hull of the generator rows."""
    n = len(lam)
    gens = np.unique(gens, axis=0)
    a = (n * lam)[:, None] * gens.T
    if gens.shape[0] == 1:
        return 1.0 - a[:, 0]
    penalty = 1e3 * (1.0 + np.abs(a).max())
    a_aug = np.vstack([a, penalty * np.ones((1, a.shape[1]))])
    b_aug = np.concatenate([np.ones(n), [penalty]])
    c, _ = scipy.optimize.nnls(a_aug, b_aug, maxiter=50 * a_aug.shape[1])
    total = c.sum()
    if total <= 0:
        c = np.full(a.shape[1], 1.0 / a.shape[1])
    else:
        c = c / total
    return 1.0 - a @ c


def duality_gap(norm: UnconditionalNorm, lam: np.ndarray) -> float:
    """Upper bound on max sum log - sum log lam_i, for lam > 0 with N(lam) <= 1.

    y = (1/lam) / N*(1/lam) is dual feasible and AM-GM gives
    sum log lambda <= -n log n - sum log y for every feasible lambda.
    """
    n = len(lam)
    return float(n * np.log(norm.dual()._eval((1.0 / lam)[None, :])[0] / n))


class LozanovskiiSolver:
    """Steepest ascent on log-weights with radial projection onto the unit sphere of N.

    The eps of the superdifferential grows when the line search is blocked by
    nearby kinks and shrinks when the eps-direction vanishes before the KKT
    residual does.
    """

    def __init__(self, tol: Optional[float] = None, max_iter: Optional[int] = None,
                 stall_rel_change: Optional[float] = None, stall_steps: Optional[int] = None,
                 armijo: Optional[float] = None, active_eps: Optional[float] = None,
                 max_generators: Optional[int] = None):
        self.tol = tol if tol is not None else setting("solver.kkt_tol")
        self.max_iter = max_iter if max_iter is not None else setting("solver.max_iter")
        self.stall_rel_change = stall_rel_change if stall_rel_change is not None else setting("solver.stall_rel_change")
        self.stall_steps = stall_steps if stall_steps is not None else setting("solver.stall_steps")
        self.armijo = armijo if armijo is not None else setting("solver.armijo")
        self.active_eps = active_eps if active_eps is not None else setting("solver.active_eps")
        self.max_generators = max_generators if max_generators is not None else setting("solver.max_generators")
        self.objective_history: list[float] = []

    @staticmethod
    def _project(norm: UnconditionalNorm, mu: np.ndarray) -> np.ndarray:
        x = np.exp(mu - mu.max())
        return x / norm._eval(x[None, :])[0]

    def kkt_residual(self, norm: UnconditionalNorm, lam: np.ndarray, eps: float = 1e-9) -> float:
        gens = norm._subgradients(lam, eps, self.max_generators)
        return float(np.abs(_min_norm_direction(lam, gens)).max())

    def solve(self, norm: UnconditionalNorm) -> LozanovskiiCertificate:
        n = norm.dim
        self.objective_history = []
        if n < 1:
            raise NormError("norm dimension must be >= 1")
        if n == 1:
            lam = np.array([1.0 / norm._eval(np.ones((1, 1)))[0]])
            return self._certificate(norm, lam, iterations=0, kkt=0.0, reason="closed-form")

        mu = np.zeros(n)
        lam = self._project(norm, mu)
        objective = float(np.log(lam).sum())
        self.objective_history.append(objective)
        step = 1.0
        eps = self.active_eps
        stalled = 0
        best_residual = float("inf")
        residual = float("inf")
        reason = None
        iteration = 0
        for iteration in range(1, self.max_iter + 1):
            residual = self.kkt_residual(norm, lam)
            if residual < self.tol:
                reason = "kkt"
                break
            direction = _min_norm_direction(lam, norm._subgradients(lam, eps, self.max_generators))
            if np.abs(direction).max() < self.tol:
                # eps-stationary but not stationary: too many pieces in the hull
                eps = max(eps * 0.1, 1e-15)
                continue
            slope = float(direction @ direction)
            accepted = False
            t = min(1.0, 2.0 * step)
            while t > 1e-18:
                candidate_mu = mu + t * direction
                candidate = self._project(norm, candidate_mu)
                candidate_obj = float(np.log(candidate).sum())
                if candidate_obj >= objective + self.armijo * t * slope:
                    accepted = True
                    break
                t *= 0.5
            if not accepted:
                # a kink just outside the eps-hull blocks the step
                eps = min(eps * 10.0, 0.5)
                stalled += 1
                if stalled >= self.stall_steps:
                    reason = "stall"
                    break
                continue
            change = abs(candidate_obj - objective) / max(1.0, abs(objective))
            improving = residual < best_residual * (1.0 - 1e-3)
            best_residual = min(best_residual, residual)
            stalled = stalled + 1 if change < self.stall_rel_change and not improving else 0
            mu = candidate_mu - candidate_mu.max()
            lam, objective, step = candidate, candidate_obj, t
            self.objective_history.append(objective)
            if stalled >= self.stall_steps:
                reason = "stall"
                break
        if reason != "kkt":
            residual = self.kkt_residual(norm, lam)
            if residual > self.tol:
                what = "stalled" if reason == "stall" else f"did not converge in {self.max_iter} iterations"
                raise ConvergenceError(
                    f"Lozanovskii solver {what} (KKT residual {residual:.3e}, tolerance {self.tol:.1e})",
                    best_weights=lam.tolist(), residual=residual, iterations=iteration,
                )
            reason = reason or "kkt"
        logger.debug(f"Lozanovskii solver stopped ({reason}) after {iteration} iterations, "
                     f"KKT residual {residual:.3e}")
        return self._certificate(norm, lam, iterations=iteration, kkt=residual, reason=reason)

    def solve_structural(self, norm: UnconditionalNorm) -> LozanovskiiCertificate:
        """Exact weights from the norm grammar, certified by KKT residual and duality gap."""
        lam = norm.lozanovskii_weights()
        residual = self.kkt_residual(norm, lam)
        if residual > self.tol:
            raise ConvergenceError(
                f"structural weights fail the KKT check (residual {residual:.3e}, tolerance {self.tol:.1e})",
                best_weights=lam.tolist(), residual=residual, iterations=0,
            )
        return self._certificate(norm, lam, iterations=0, kkt=residual, reason="closed-form")

    def _certificate(self, norm: UnconditionalNorm, lam: np.ndarray, iterations: int,
                     kkt: float, reason: str) -> LozanovskiiCertificate:
        cert = LozanovskiiCertificate(
            weights=lam.tolist(),
            objective=float(np.log(lam).sum()),
            norm_of_lambda=float(norm._eval(lam[None, :])[0]),
            lower_residual=0.0,
            kkt_residual=kkt,
            duality_gap=max(0.0, duality_gap(norm, lam)),
            iterations=iterations,
            stop_reason=reason,
        )
        report = verify_certificate(norm, cert, samples=setting("solver.verify_samples"), seed=0)
        return cert.model_copy(update={"lower_residual": max(0.0, 1.0 - report.left_ratio)})


def solve_weights(norm: UnconditionalNorm, method: Optional[str] = None,
                  **solver_options) -> LozanovskiiCertificate:
    """Lozanovskii weights for `norm` with a verified certificate.

    `method` is "structural" (exact, from the norm grammar) or "ascent"; the
    default comes from the solver.method setting.
    """
    method = method or setting("solver.method")
    if method not in SOLVER_METHODS:
        raise ValueError(f"unknown solver method {method!r}, expected one of {SOLVER_METHODS}")
    solver = LozanovskiiSolver(**solver_options)
    with get_logger().section("solve_weights", timed=True) as ccl:
        ccl.write_kv("method", method)
        try:
            if method == "structural":
                return solver.solve_structural(norm)
            return solver.solve(norm)
        finally:
            ccl.write_kv("iterations", len(solver.objective_history))


def verify_certificate(norm: UnconditionalNorm, cert: LozanovskiiCertificate, samples: int,
                       seed: int, tolerance: Optional[float] = None) -> CertificateReport:
    """Check (1/n)||a||_1 <= N(lambda a) <= ||a||_inf on samples, unit vectors and sign vertices."""
    tolerance = tolerance if tolerance is not None else setting("tolerances.certificate")
    lam = cert.lam
    n = norm.dim
    if len(lam) != n:
        raise NormError(f"certificate has {len(lam)} weights, norm has dimension {n}")
    rng = np.random.default_rng(seed)
    parts = [rng.standard_normal((max(samples, 0), n)), np.eye(n), np.ones((1, n))]
    use_signs = n <= 16
    if use_signs:
        parts.append(sign_vectors(n))
    alphas = np.vstack(parts)
    values = norm._eval(alphas * lam)
    left = values / (np.abs(alphas).sum(axis=1) / n)
    right = values / np.abs(alphas).max(axis=1)
    left_ratio = float(left.min())
    right_ratio = float(right.max())
    passed = left_ratio >= 1.0 - tolerance and right_ratio <= 1.0 + tolerance
    return CertificateReport(left_ratio=left_ratio, right_ratio=right_ratio, checked=len(alphas),
                             sign_vertices=use_signs, tolerance=tolerance, passed=passed)


def build_embedding(cert: LozanovskiiCertificate, norm: Optional[UnconditionalNorm] = None,
                    tolerance: Optional[float] = None) -> EmbeddingMaps:
    """T = diag(1/(n lambda)), S = diag(n lambda).

    With `norm` given, ||T|| <= 1 and ||S|| <= n are checked exactly.
    """
    lam = cert.lam
    if np.any(lam <= 0) or not np.all(np.isfinite(lam)):
        raise NormError("Lozanovskii weights must be positive and finite")
    n = len(lam)
    maps = EmbeddingMaps(T_diag=(1.0 / (n * lam)).tolist(), S_diag=(n * lam).tolist())
    if norm is not None:
        tolerance = tolerance if tolerance is not None else setting("tolerances.certificate")
        t_norm, s_norm = maps.operator_norms(norm)
        if t_norm > 1.0 + tolerance or s_norm > n * (1.0 + tolerance):
            raise BoundViolationError(
                f"embedding operator norms out of range: ||T|| = {t_norm:.12g}, ||S|| = {s_norm:.12g}"
            )
    return maps


__all__ = [
    "LozanovskiiCertificate", "CertificateReport", "LozanovskiiSolver",
    "solve_weights", "verify_certificate", "build_embedding", "duality_gap", "SOLVER_METHODS",
]
