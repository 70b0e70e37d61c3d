#!/usr/bin/env python3
"""lozvol - Lozanovskii weights, enclosing polytopes and volume/section checks.

Exit codes: 0 when every verdict passes, 2 when any verdict fails, 1 on an
execution error.
"""

import argparse
import sys
from pathlib import Path
from typing import Iterable, Optional

from lozvol.ui.logging_config import logger, enable_console_logging  # Import logger first to ensure it's initialized
from lozvol import __version__, config
from lozvol.ccl_log import close_logger, get_logger, init_logger
from lozvol.ccl_log_safe import setup_safe_logging
from lozvol.errors import BoundCheckReport, LozvolError, SelectionMethod, Stage, StageError, Verdict

EXIT_PASS = 0
EXIT_ERROR = 1
EXIT_FAIL = 2


def exit_code(verdicts: Iterable[BoundCheckReport]) -> int:
    return EXIT_FAIL if any(v.verdict == Verdict.FAIL for v in verdicts) else EXIT_PASS


def write_output(model, out: Optional[str]):
    if out is None:
        return
    Path(out).write_text(model.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info(f"wrote {out}")


def _load_norm(path: str):
    from lozvol.norms import parse_norm
    from lozvol.runner.instance import read_json_object
    data = read_json_object(path)
    # an instance file is accepted too
    return parse_norm(data["norm"] if "norm" in data and "kind" not in data else data)


def cmd_lozanovskii(args) -> int:
    from lozvol.defaults import setting
    from lozvol.lozanovskii import solve_weights, verify_certificate
    from lozvol.ui.console import show_certificate

    norm = _load_norm(args.norm)
    cert = solve_weights(norm, method=args.method, tol=args.tol)
    check = verify_certificate(norm, cert, samples=setting("solver.verify_samples"), seed=args.seed)
    show_certificate(cert, check)
    write_output(cert, args.out)
    return EXIT_PASS if check.passed else EXIT_FAIL


def cmd_enclose(args) -> int:
    from lozvol.norms import SubspaceBasis
    from lozvol.pipeline.enclosing import enclose
    from lozvol.errors import InstanceValidationError
    from lozvol.runner.instance import read_json_object
    from lozvol.ui.console import show_enclosing, show_verdicts

    norm = _load_norm(args.norm)
    data = read_json_object(args.subspace)
    rows = data.get("subspace", data.get("basis"))
    if rows is None:
        raise InstanceValidationError("subspace", "missing basis rows")
    E = SubspaceBasis.from_rows(rows)
    if E.ambient_dim != norm.dim:
        raise InstanceValidationError("subspace", f"every basis row must have length {norm.dim}")
    result = enclose(norm, E, method=SelectionMethod(args.method), seed=args.seed, raise_on_violation=False)
    show_enclosing(result)
    show_verdicts([result.report])
    write_output(result, args.out)
    return exit_code([result.report])


def cmd_volume(args) -> int:
    from lozvol.runner.instance import parse_body
    from lozvol.ui.console import console
    from lozvol.volume.bodies import body_volume

    body = parse_body(args.body)
    estimate = body_volume(body, samples=args.mc_samples, seed=args.seed)
    console.print(f"volume = {estimate.value:.12g}  ({estimate.method.value}"
                  + (f", std error {estimate.std_error:.3g}" if estimate.std_error else "") + ")")
    write_output(estimate, args.out)
    return EXIT_PASS


def cmd_isotropy(args) -> int:
    from lozvol.isotropy.moments import to_isotropic
    from lozvol.runner.instance import parse_body
    from lozvol.ui.console import console, show_message

    body = parse_body(args.body)
    report = to_isotropic(body, samples=args.mc_samples, seed=args.seed)
    console.print(f"L_K = {report.L_K:.12g}  (covariance residual {report.cov_residual:.2e}, "
                  f"volume residual {report.volume_check:.2e})")
    if not report.within_tolerance:
        show_message("isotropic position residuals are above tolerance")
    write_output(report, args.out)
    return EXIT_PASS


def cmd_verify(args) -> int:
    from lozvol.isotropy.bounds import check_lemma3, check_theorem2, check_theorem3, check_theorem4
    from lozvol.runner.instance import parse_instance
    from lozvol.runner.run import instance_settings
    from lozvol.ui.console import show_verdicts
    from lozvol.volume.bodies import NormBall

    inst = parse_instance(args.instance)
    with instance_settings(inst.settings):
        if args.theorem == "2":
            report = check_theorem2(inst.norm, inst.subspace_basis(), method=inst.method, seed=inst.seed)
        elif args.theorem == "3":
            report = check_theorem3(inst.norm, inst.subspace_basis(), seed=inst.seed)
        elif args.theorem == "4":
            if inst.quotient is None:
                raise LozvolError("--theorem 4 needs an instance with a quotient map")
            constant = args.constant if args.constant is not None else inst.theorem4_constant
            report = check_theorem4(inst.norm, inst.quotient_matrix(), constant=constant, seed=inst.seed)
        else:
            ball = NormBall.of_subspace(inst.norm, inst.subspace_basis())
            report, _ = check_lemma3(ball, seed=inst.seed)
    get_logger().log_verdict(report)
    show_verdicts([report])
    write_output(report, args.out)
    return exit_code([report])


def cmd_run(args) -> int:
    from lozvol.runner.instance import parse_instance
    from lozvol.runner.run import run_pipeline
    from lozvol.ui.console import show_certificate, show_enclosing, show_message, show_verdicts

    inst = parse_instance(args.instance)
    try:
        report = run_pipeline(inst, args.stages)
    except StageError as e:
        if e.partial_report is not None:
            write_output(e.partial_report, args.out)
        raise
    if report.certificate is not None:
        show_certificate(report.certificate, report.certificate_check)
    if report.enclosing is not None:
        show_enclosing(report.enclosing)
    show_verdicts(report.verdicts)
    for note in report.notes:
        show_message(note)
    write_output(report, args.out)
    return exit_code(report.verdicts)


def cmd_suite(args) -> int:
    from lozvol.runner.suite import generate_suite, run_suite
    from lozvol.ui.console import show_suite

    instances = generate_suite((args.n_min, args.n_max), (args.k_min, args.k_max), args.count, args.seed,
                               quotients=not args.no_quotients, method=SelectionMethod(args.method))
    cache_dir = args.cache_dir or config.cache_dir
    result = run_suite(instances, stages=args.stages, threads=args.threads, cache_dir=cache_dir,
                       csv_path=args.csv)
    show_suite(result)
    write_output(result, args.out)
    get_logger().log_session_end(instances=len(result.rows), failures=result.failures)
    close_logger()
    if result.errors:
        return EXIT_ERROR
    return EXIT_FAIL if result.failures else EXIT_PASS


def _stage_list(value: str) -> list[Stage]:
    try:
        return [Stage(part.strip()) for part in value.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--log-file", type=str, default=None,
                        help="Write a structured CCL run log to this file")
    common.add_argument("--verbose", "-v", action="store_true", help="Debug output on stderr")
    common.add_argument("--seed", type=int, default=0, help="Random seed (default: 0)")
    common.add_argument("--out", type=str, default=None, help="Write the JSON result to this file")

    parser = argparse.ArgumentParser(
        prog="lozvol",
        description="Lozanovskii weights, enclosing cross-polytopes and volume/section inequalities",
    )
    parser.add_argument("--version", action="version", version=f"lozvol {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lozanovskii", parents=[common], help="Solve for the Lozanovskii weights of a norm")
    p.add_argument("--norm", required=True, help="Norm JSON file")
    p.add_argument("--tol", type=float, default=None, help="KKT residual tolerance (default 1e-8)")
    p.add_argument("--method", choices=["structural", "ascent"], default=None,
                   help="Exact weights from the norm grammar, or steepest ascent (default: solver.method)")
    p.set_defaults(func=cmd_lozanovskii)

    p = sub.add_parser("enclose", parents=[common], help="Cross-polytope containing the unit ball of a subspace")
    p.add_argument("--norm", required=True, help="Norm JSON file")
    p.add_argument("--subspace", required=True, help='JSON file {"subspace": [[...], ...]}')
    p.add_argument("--method", choices=[m.value for m in SelectionMethod], default="exact")
    p.set_defaults(func=cmd_enclose)

    p = sub.add_parser("volume", parents=[common], help="Volume of a polytope or unit ball")
    p.add_argument("--body", required=True, help='JSON file {"vrep"|"hrep"|"norm"+"subspace"|"quotient"}')
    p.add_argument("--mc-samples", type=int, default=None, help="Initial Monte Carlo sample count")
    p.set_defaults(func=cmd_volume)

    p = sub.add_parser("isotropy", parents=[common], help="Isotropic position and L_K of a body")
    p.add_argument("--body", required=True, help="Body JSON file (same format as volume)")
    p.add_argument("--mc-samples", type=int, default=None, help="Initial Monte Carlo sample count")
    p.set_defaults(func=cmd_isotropy)

    p = sub.add_parser("verify", parents=[common], help="Check one inequality on an instance")
    p.add_argument("--theorem", required=True, choices=["2", "3", "4", "lemma3"])
    p.add_argument("--instance", required=True, help="Instance JSON file")
    p.add_argument("--constant", type=float, default=None, help="Constant for --theorem 4 (default 2e*sqrt(6))")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("run", parents=[common], help="Run the pipeline stages on an instance")
    p.add_argument("--instance", required=True, help="Instance JSON file")
    p.add_argument("--stages", type=_stage_list, default=None,
                   help="Comma-separated stages (default: all): " + ",".join(s.value for s in Stage))
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("suite", parents=[common], help="Run a random suite of instances")
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--k-max", type=int, default=3)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--method", choices=[m.value for m in SelectionMethod], default="exact")
    p.add_argument("--stages", type=_stage_list, default=None, help="Comma-separated stages (default: all)")
    p.add_argument("--threads", type=int, default=None, help="Worker threads (default: LOZVOL_THREADS)")
    p.add_argument("--no-quotients", action="store_true", help="Generate instances without quotient maps")
    p.add_argument("--csv", type=str, default=None, help="Write the CSV summary to this file")
    p.add_argument("--cache-dir", type=str, default=None, help="Memoise per-instance reports in this directory")
    p.set_defaults(func=cmd_suite)
    return parser


def main(argv: Optional[list[str]] = None):
    parser = build_parser()
    args = parser.parse_args(argv)
    config.init()
    enable_console_logging("DEBUG" if args.verbose else "INFO")
    if args.log_file:
        init_logger(Path(args.log_file))
        setup_safe_logging()
        ccl = get_logger()
        ccl.write_kv("command", args.command)
        ccl.write_kv("lozvol_version", __version__)
    try:
        code = args.func(args)
    except KeyboardInterrupt:
        logger.info("\nExiting...")
        sys.exit(EXIT_ERROR)
    except (LozvolError, OSError, ValueError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        logger.opt(exception=e).debug("traceback")
        get_logger().log_exception(f"{type(e).__name__}: {e}")
        sys.exit(EXIT_ERROR)
    except Exception as e:
        logger.opt(exception=e).error(f"Fatal error: {e}")
        get_logger().log_exception(f"{type(e).__name__}: {e}")
        sys.exit(EXIT_ERROR)
    sys.exit(code)


if __name__ == "__main__":
    main()
