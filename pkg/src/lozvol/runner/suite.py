"""Random instance suites and their parallel execution."""

import csv
import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
from diskcache import Cache
from pydantic import BaseModel

from lozvol import config
from lozvol.ccl_log import get_logger, suppressed
from lozvol.errors import LozvolError, SelectionMethod, StageError, Verdict
from lozvol.norms import Block, BlockNorm, LpNorm
from lozvol.runner.instance import Instance
from lozvol.runner.run import RunReport, resolve_stages, run_pipeline
from lozvol.ui.logging_config import logger

SUITE_P_VALUES = (1.0, 1.5, 2.0, 3.0, float("inf"))
SUITE_MAX_DIM = 10
CSV_COLUMNS = [
    "name", "n", "k", "ratio", "bound", "L_K", "max_section",
    "theorem3_min_constant", "theorem4_min_constant", "verdicts", "error",
]


def _random_leaf(rng: np.random.Generator, size: int) -> LpNorm:
    p = SUITE_P_VALUES[rng.integers(len(SUITE_P_VALUES))]
    return LpNorm(p=p, weights=rng.uniform(0.5, 2.0, size).tolist())


def random_norm(rng: np.random.Generator, n: int):
    """A single weighted l_p norm or a max/sum of them over a random partition of the coordinates."""
    if n == 1 or rng.random() < 0.5:
        return _random_leaf(rng, n)
    parts = int(rng.integers(2, min(n, 3) + 1))
    perm = rng.permutation(n)
    cuts = np.sort(rng.choice(np.arange(1, n), size=parts - 1, replace=False))
    blocks = [
        Block(coords=sorted(int(c) for c in chunk), norm=_random_leaf(rng, len(chunk)))
        for chunk in np.split(perm, cuts)
    ]
    kind = "max" if rng.random() < 0.5 else "sum"
    return BlockNorm(kind=kind, blocks=blocks)


def _check_ranges(n_range: tuple[int, int], k_range: tuple[int, int]):
    n_lo, n_hi = n_range
    k_lo, k_hi = k_range
    if not 1 <= n_lo <= n_hi <= SUITE_MAX_DIM:
        raise ValueError(f"n range must satisfy 1 <= n_min <= n_max <= {SUITE_MAX_DIM}, got {n_range}")
    if not 1 <= k_lo <= k_hi:
        raise ValueError(f"k range must satisfy 1 <= k_min <= k_max, got {k_range}")
    if k_lo > n_hi:
        raise ValueError(f"k_min {k_lo} exceeds n_max {n_hi}")


def generate_suite(n_range: tuple[int, int], k_range: tuple[int, int], count: int, seed: int,
                   quotients: bool = True, method: SelectionMethod = SelectionMethod.EXACT) -> list[Instance]:
    """`count` reproducible random instances with Gaussian subspace bases and quotient maps."""
    _check_ranges(n_range, k_range)
    rng = np.random.default_rng(seed)
    instances = []
    for i in range(count):
        n = int(rng.integers(max(n_range[0], k_range[0]), n_range[1] + 1))
        k = int(rng.integers(k_range[0], min(k_range[1], n) + 1))
        norm = random_norm(rng, n)
        subspace = rng.standard_normal((k, n)).tolist()
        quotient = rng.standard_normal((k, n)).tolist() if quotients else None
        instances.append(Instance(
            name=f"suite-{seed}-{i:04d}", dim=n, norm=norm, subspace=subspace, quotient=quotient,
            seed=seed + i, method=method,
        ).check())
    return instances


class SuiteRow(BaseModel):
    name: str
    n: int
    k: int
    ratio: Optional[float] = None
    bound: Optional[float] = None
    L_K: Optional[float] = None
    max_section: Optional[float] = None
    theorem3_min_constant: Optional[float] = None
    theorem4_min_constant: Optional[float] = None
    verdicts: dict[str, Verdict] = {}
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None or any(v == Verdict.FAIL for v in self.verdicts.values())

    @classmethod
    def from_report(cls, inst: Instance, report: Optional[RunReport], error: Optional[str]) -> "SuiteRow":
        row = cls(name=inst.name or "", n=inst.n, k=inst.k, error=error)
        if report is None:
            return row
        row.verdicts = {v.name: v.verdict for v in report.verdicts}
        if report.enclosing is not None:
            row.ratio, row.bound = report.enclosing.ratio, report.enclosing.bound
        if report.isotropy is not None:
            row.L_K = report.isotropy.L_K
        if report.theorem3 is not None and report.theorem3.verdict != Verdict.SKIPPED:
            row.max_section = report.theorem3.details.get("max_section")
            row.theorem3_min_constant = report.theorem3.min_constant
        if report.theorem4 is not None and report.theorem4.verdict != Verdict.SKIPPED:
            row.theorem4_min_constant = report.theorem4.min_constant
        return row


class SuiteResult(BaseModel):
    rows: list[SuiteRow]
    reports: list[Optional[RunReport]]

    @property
    def failures(self) -> int:
        return sum(row.failed for row in self.rows)

    @property
    def errors(self) -> int:
        return sum(row.error is not None for row in self.rows)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(rows: list[SuiteRow], path):
    """One line per instance; '.' decimals and '\\n' line endings whatever the locale."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            verdicts = ";".join(f"{name}={v.value}" for name, v in row.verdicts.items())
            writer.writerow([
                row.name, row.n, row.k, _fmt(row.ratio), _fmt(row.bound), _fmt(row.L_K),
                _fmt(row.max_section), _fmt(row.theorem3_min_constant),
                _fmt(row.theorem4_min_constant), verdicts, row.error or "",
            ])


def cache_key(inst: Instance, stages) -> str:
    payload = {"instance": inst.model_dump(mode="json"), "stages": [s.value for s in stages]}
    return hashlib.md5(json.dumps(payload, sort_keys=True).encode("utf-8")).hexdigest()


def _run_one(inst: Instance, stages, cache: Optional[Cache]) -> tuple[Optional[RunReport], Optional[str]]:
    key = cache_key(inst, stages) if cache is not None else None
    if cache is not None and key in cache:
        logger.debug(f"{inst.name}: cached")
        return RunReport.model_validate_json(cache[key]), None
    try:
        report = run_pipeline(inst, stages)
    except StageError as e:
        logger.error(f"{inst.name}: {e}")
        return e.partial_report, str(e)
    except LozvolError as e:
        logger.error(f"{inst.name}: {e}")
        return None, str(e)
    if cache is not None:
        cache[key] = report.model_dump_json()
    return report, None


def run_suite(instances: list[Instance], stages: Optional[Iterable] = None, threads: Optional[int] = None,
              cache_dir: Optional[Path] = None, csv_path: Optional[Path] = None) -> SuiteResult:
    """Run every instance; results come back in input order.

    Instances carrying settings overrides run one at a time on the calling
    thread since the settings are process-wide.
    """
    stages = resolve_stages(stages)
    threads = config.get_threads() if threads is None else max(1, threads)
    cache = Cache(str(cache_dir)) if cache_dir is not None else None

    def pooled(inst: Instance):
        with suppressed():
            return _run_one(inst, stages, cache)

    results: list = [None] * len(instances)
    try:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {i: pool.submit(pooled, inst) for i, inst in enumerate(instances) if not inst.settings}
            for i, future in futures.items():
                results[i] = future.result()
        for i, inst in enumerate(instances):
            if inst.settings:
                results[i] = _run_one(inst, stages, cache)
    finally:
        if cache is not None:
            cache.close()

    rows = [SuiteRow.from_report(inst, report, error) for inst, (report, error) in zip(instances, results)]
    reports = [report for report, _ in results]

    with get_logger().section("suite") as ccl:
        ccl.write_kv("instances", len(rows))
        if rows:
            with ccl.items() as next_item:
                for i, row in enumerate(rows):
                    if i:
                        next_item()
                    ccl.write_kv("name", row.name)
                    ccl.write_kv("verdicts", ";".join(f"{k}={v.value}" for k, v in row.verdicts.items()))
                    ccl.write_kv("error", row.error)

    if csv_path is not None:
        write_csv(rows, csv_path)
    logger.info(f"suite: {len(rows)} instances, {sum(r.failed for r in rows)} failing")
    return SuiteResult(rows=rows, reports=reports)
