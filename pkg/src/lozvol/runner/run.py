"""Runs the stages of one instance in dependency order and collects a RunReport."""

import time
from typing import Any, Iterable, Optional

import numpy as np
import scipy
from pydantic import BaseModel

from lozvol import __version__
from lozvol.ccl_log import get_logger
from lozvol.defaults import get_settings_manager, setting
from lozvol.errors import (
    BoundCheckReport, EnumerationCapError, SelectionMethod, Stage, StageError, Verdict,
)
from lozvol.isotropy.bounds import (
    HensleyReport, check_lemma3, check_theorem3, check_theorem4, hensley_band,
)
from lozvol.isotropy.moments import IsotropyReport, to_isotropic
from lozvol.isotropy.summing import Pi1Estimate
from lozvol.lozanovskii import (
    CertificateReport, LozanovskiiCertificate, build_embedding, solve_weights, verify_certificate,
)
from lozvol.pipeline.embedding import EmbeddingMaps, ProjectionFrame, embed_subspace
from lozvol.pipeline.enclosing import (
    EnclosingCrossPolytope, QuotientCubeReport, build_enclosing_polytope, check_binomial_step,
    check_section_ratio, check_zonoid_santalo, lemma2_ratio, quotient_cube,
)
from lozvol.pipeline.subsets import SubsetSelection, select_max_det_subset
from lozvol.runner.instance import Instance
from lozvol.ui.logging_config import logger
from lozvol.volume.bodies import NormBall

STAGE_REQUIRES = {
    Stage.ENCLOSE: {Stage.LOZANOVSKII},
    Stage.LEMMA2: {Stage.LOZANOVSKII},
    Stage.LEMMA3: {Stage.ISOTROPY},
}


class RunReport(BaseModel):
    """Everything one run produced. Absent stages leave their fields at None."""
    name: Optional[str] = None
    seed: int
    n: int
    k: int
    stages: list[Stage]
    certificate: Optional[LozanovskiiCertificate] = None
    certificate_check: Optional[CertificateReport] = None
    maps: Optional[EmbeddingMaps] = None
    frame: Optional[ProjectionFrame] = None
    selection: Optional[SubsetSelection] = None
    enclosing: Optional[EnclosingCrossPolytope] = None
    lemma2: Optional[BoundCheckReport] = None
    theorem3: Optional[BoundCheckReport] = None
    isotropy: Optional[IsotropyReport] = None
    hensley: Optional[HensleyReport] = None
    lemma3: Optional[BoundCheckReport] = None
    pi1: Optional[Pi1Estimate] = None
    quotient: Optional[QuotientCubeReport] = None
    theorem4: Optional[BoundCheckReport] = None
    verdicts: list[BoundCheckReport] = []
    timings: dict[str, float] = {}
    versions: dict[str, str] = {}
    failed_stage: Optional[Stage] = None
    error: Optional[str] = None
    notes: list[str] = []

    @property
    def passed(self) -> bool:
        return self.error is None and all(v.passed for v in self.verdicts)

    def verdict(self, name: str) -> Optional[BoundCheckReport]:
        return next((v for v in self.verdicts if v.name == name), None)

    def numeric_payload(self) -> str:
        """The report as JSON without timings and versions; equal for equal seeds under method=exact."""
        return self.model_dump_json(exclude={"timings", "versions"})


def resolve_stages(requested: Optional[Iterable] = None) -> list[Stage]:
    """Requested stages plus everything they depend on, in pipeline order."""
    if requested is None:
        return Stage.ordered()
    wanted = {Stage(s) for s in requested}
    pending = list(wanted)
    while pending:
        for dep in STAGE_REQUIRES.get(pending.pop(), ()):
            if dep not in wanted:
                wanted.add(dep)
                pending.append(dep)
    return [s for s in Stage.ordered() if s in wanted]


def instance_settings(overrides: dict[str, Any]):
    """Merge the instance overrides over the active settings while the run lasts."""
    return get_settings_manager().overridden(overrides)


def _certificate_verdict(check: CertificateReport) -> BoundCheckReport:
    """Both inequalities of the certificate folded into one ratio that must stay <= 1."""
    worst = max(check.right_ratio, 1.0 / check.left_ratio if check.left_ratio > 0 else float("inf"))
    return BoundCheckReport.compare(
        "lemma1", lhs=worst, rhs=1.0, tolerance=check.tolerance,
        left_ratio=check.left_ratio, right_ratio=check.right_ratio, checked=check.checked,
    )


class _PipelineRun:
    """Mutable state shared by the stage functions of one run."""

    def __init__(self, inst: Instance, stages: list[Stage]):
        self.inst = inst
        self.norm = inst.norm
        self.E = inst.subspace_basis()
        self.Q = inst.quotient_matrix()
        self.seed = inst.seed
        self.report = RunReport(
            name=inst.name, seed=inst.seed, n=inst.n, k=inst.k, stages=stages,
            versions={"lozvol": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
        )
        self._ball: Optional[NormBall] = None

    @property
    def ball(self) -> NormBall:
        if self._ball is None:
            self._ball = NormBall.of_subspace(self.norm, self.E)
        return self._ball

    def add_verdict(self, verdict: BoundCheckReport):
        self.report.verdicts.append(verdict)
        get_logger().log_verdict(verdict)
        if verdict.verdict == Verdict.FAIL:
            logger.warning(f"{verdict.name}: FAIL (lhs {verdict.lhs:.6g}, rhs {verdict.rhs:.6g})")

    def note(self, text: str):
        self.report.notes.append(text)
        logger.info(text)

    def lozanovskii(self) -> dict:
        cert = solve_weights(self.norm)
        check = verify_certificate(self.norm, cert, samples=setting("solver.verify_samples"), seed=self.seed)
        self.report.certificate = cert
        self.report.certificate_check = check
        self.report.maps = build_embedding(cert, self.norm)
        self.add_verdict(_certificate_verdict(check))
        return {"objective": cert.objective, "kkt_residual": f"{cert.kkt_residual:.3e}",
                "duality_gap": f"{cert.duality_gap:.3e}", "stop_reason": cert.stop_reason}

    def enclose(self) -> dict:
        maps = self.report.maps
        frame = embed_subspace(self.E, maps)
        try:
            sel = select_max_det_subset(frame, method=self.inst.method)
        except EnumerationCapError as e:
            self.note(f"{e}; falling back to greedy selection")
            sel = select_max_det_subset(frame, method=SelectionMethod.GREEDY)
        self.report.frame = frame
        self.report.selection = sel
        enclosing = build_enclosing_polytope(self.norm, self.E, maps, frame, sel, seed=self.seed,
                                             raise_on_violation=False)
        self.report.enclosing = enclosing
        self.add_verdict(enclosing.report)
        if sel.method == SelectionMethod.EXACT:
            # the polar zonotope volume enumerates every subset, like the exact selection
            self.add_verdict(check_section_ratio(frame))
            self.add_verdict(check_zonoid_santalo(frame))
            self.add_verdict(check_binomial_step(frame, sel))
        return {"ratio": enclosing.ratio, "bound": enclosing.bound, "sigma": sel.sigma}

    def lemma2(self) -> dict:
        verdict = lemma2_ratio(self.norm, self.E, self.report.maps, seed=self.seed)
        self.report.lemma2 = verdict
        self.add_verdict(verdict)
        return {"lhs": verdict.lhs}

    def theorem3(self) -> dict:
        verdict = check_theorem3(self.norm, self.E, seed=self.seed)
        self.report.theorem3 = verdict
        self.add_verdict(verdict)
        return {"min_constant": verdict.min_constant}

    def isotropy(self) -> dict:
        iso = to_isotropic(self.ball, seed=self.seed)
        self.report.isotropy = iso
        if not iso.within_tolerance:
            self.note(f"isotropic position residuals above tolerance "
                      f"(covariance {iso.cov_residual:.2e}, volume {iso.volume_check:.2e})")
        if self.ball.dim >= 2:
            self.report.hensley = hensley_band(self.ball, iso, seed=self.seed)
        return {"L_K": iso.L_K, "exact": iso.exact}

    def lemma3(self) -> dict:
        verdict, estimate = check_lemma3(self.ball, self.report.isotropy, seed=self.seed)
        self.report.lemma3 = verdict
        self.report.pi1 = estimate
        self.add_verdict(verdict)
        return {"pi1_lower_bound": estimate.lower_bound, "witness": estimate.family_name}

    def quotient(self) -> dict:
        if self.Q is None:
            self.add_verdict(BoundCheckReport.skipped("quotient_cube", "instance has no quotient map"))
            return {}
        cube = quotient_cube(self.norm, self.Q, method=self.inst.method, seed=self.seed)
        self.report.quotient = cube
        self.add_verdict(cube.report)
        return {"ratio": cube.ratio, "measured_constant": f"{cube.measured_constant:.6g}"}

    def theorem4(self) -> dict:
        if self.Q is None:
            verdict = BoundCheckReport.skipped("theorem4", "instance has no quotient map")
        else:
            verdict = check_theorem4(self.norm, self.Q, constant=self.inst.theorem4_constant, seed=self.seed)
        self.report.theorem4 = verdict
        self.add_verdict(verdict)
        return {"min_constant": verdict.min_constant}


def run_pipeline(inst: Instance, stages: Optional[Iterable] = None) -> RunReport:
    """Execute the requested stages (and their prerequisites) for one instance.

    On failure raises StageError naming the stage, with the report filled up
    to that point.
    """
    order = resolve_stages(stages)
    run = _PipelineRun(inst, order)
    with get_logger().section("run", timed=True) as ccl, instance_settings(inst.settings):
        ccl.write_kv("instance", inst.name)
        ccl.write_kv("n", inst.n)
        ccl.write_kv("k", inst.k)
        ccl.write_kv("seed", inst.seed)
        ccl.write_kv("method", inst.method)
        ccl.log_settings()
        for stage in order:
            with ccl.section("stage", timed=True):
                ccl.write_kv("name", stage.value)
                start = time.perf_counter()
                try:
                    headline = getattr(run, stage.value)()
                except Exception as e:
                    run.report.timings[stage.value] = time.perf_counter() - start
                    run.report.failed_stage = stage
                    run.report.error = f"{type(e).__name__}: {e}"
                    ccl.write_kv("error", run.report.error)
                    raise StageError(stage, e, run.report) from e
                run.report.timings[stage.value] = time.perf_counter() - start
                for key, value in headline.items():
                    ccl.write_kv(key, value)
            logger.debug(f"stage {stage.value} done in {run.report.timings[stage.value]:.2f}s")
    return run.report
