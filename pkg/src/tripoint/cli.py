"""Command line interface.

Subcommands: `solve` (native problem file), `batch` (camera files plus a
measurement matrix), `examples` (the bundled synthetic suite), and
`check-derivatives` (finite-difference audit of the analytic derivatives).
Exit code 0 on full success, 1 when any track fails to converge, 2 on
parse or configuration errors.
"""

from __future__ import annotations

import argparse
import glob
import sys
import time

import numpy as np

from .batch import emit_report, run_batch
from .datasets import (
    DimensionMismatch,
    InvalidCamera,
    ParseError,
    load_problem_file,
    parse_vgg_dataset,
)
from .derivatives import (
    build_caches,
    finite_difference_hessian,
    finite_difference_jacobian,
    hessian,
    jacobian,
)
from .core import evaluate_residual
from .initializer import initial_point
from .solver import METHODS, SolverConfig, solve
from .synthetic import benchmark_problem
from .verification import optimality_report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="triangulate",
        description="Multi-view L2 triangulation from calibrated cameras.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve every track of a native problem file")
    p_solve.add_argument("--problem", required=True, help="native problem file")
    p_solve.add_argument("--method", choices=METHODS, default="gn_line_search")
    p_solve.add_argument("--report", choices=("table", "json", "csv"), default="table")

    p_batch = sub.add_parser("batch", help="solve a measurement-matrix dataset")
    p_batch.add_argument("--cameras", required=True,
                         help="glob of camera matrix files (sorted by name)")
    p_batch.add_argument("--points", required=True, help="measurement matrix file")
    p_batch.add_argument("--method", choices=METHODS, default="gn_line_search")
    p_batch.add_argument("--jobs", type=int, default=1)
    p_batch.add_argument("--report", choices=("table", "json", "csv"), default="table")
    p_batch.add_argument("--out", help="write the report here instead of stdout")

    p_examples = sub.add_parser("examples", help="run the bundled synthetic suite")
    p_examples.add_argument("--method", choices=METHODS, default="gn_line_search")

    p_check = sub.add_parser("check-derivatives",
                             help="finite-difference audit on a problem file")
    p_check.add_argument("--problem", required=True)
    p_check.add_argument("--jacobian-tol", type=float, default=1e-6)
    p_check.add_argument("--hessian-tol", type=float, default=1e-5)
    return parser


def _failure_count(report):
    return sum(1 for r in report.details if r.status != "converged")


def _cmd_solve(args):
    dataset = load_problem_file(args.problem)
    report = run_batch(dataset, SolverConfig(method=args.method))
    sys.stdout.write(emit_report(report, args.report))
    return 1 if _failure_count(report) else 0


def _cmd_batch(args):
    camera_files = sorted(glob.glob(args.cameras))
    if not camera_files:
        raise ParseError(f"no camera files match {args.cameras!r}")
    dataset = parse_vgg_dataset(camera_files, args.points)
    report = run_batch(dataset, SolverConfig(method=args.method), jobs=args.jobs)
    text = emit_report(report, args.report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return 1 if _failure_count(report) else 0


def _cmd_examples(args):
    start = time.perf_counter()
    config = SolverConfig(method=args.method)
    print(f"{'case':<6} {'n':>2} {'x':>20} {'y':>20} {'z':>20} "
          f"{'reprojection error':>20} {'K_LC':>10} {'optimal':>8}")
    all_converged = True
    for name in ("sa2", "sa3", "sa4", "con"):
        problem = benchmark_problem(name)
        report = solve(problem, config)
        diag = optimality_report(problem, build_caches(problem), report.solution)
        x, y, z = report.solution
        print(f"{name:<6} {problem.n:>2} {x:>20.15f} {y:>20.15f} {z:>20.15f} "
              f"{report.cost:>20.15f} {report.kantorovich_distance:>10.2e} "
              f"{str(diag.numerically_l2_optimal):>8}")
        all_converged = all_converged and report.status == "converged"
    print(f"# elapsed: {time.perf_counter() - start:.3f} s")
    return 0 if all_converged else 1


def _cmd_check_derivatives(args):
    dataset = load_problem_file(args.problem)
    rng = np.random.default_rng(0)
    worst_j = 0.0
    worst_h = 0.0
    for track in dataset.tracks:
        problem = dataset.problem_for(track)
        caches = build_caches(problem)
        base, _ = initial_point(problem)
        probes = [base] + [base + 0.1 * rng.normal(size=3) for _ in range(2)]
        for point in probes:
            try:
                residual = evaluate_residual(problem, point)
            except ValueError:
                continue
            j = jacobian(problem, caches, point)
            j_err = np.max(np.abs(j - finite_difference_jacobian(problem, point)))
            j_err /= 1.0 + np.max(np.abs(j))
            h = hessian(problem, caches, point, residual)
            h_err = np.max(np.abs(h - finite_difference_hessian(problem, caches, point)))
            h_err /= 1.0 + np.max(np.abs(h))
            worst_j = max(worst_j, j_err)
            worst_h = max(worst_h, h_err)
        print(f"track {track.identifier}: checked {len(probes)} points")
    print(f"max relative jacobian deviation: {worst_j:.3e} (tolerance {args.jacobian_tol:g})")
    print(f"max relative hessian deviation:  {worst_h:.3e} (tolerance {args.hessian_tol:g})")
    ok = worst_j <= args.jacobian_tol and worst_h <= args.hessian_tol
    print("derivative check:", "PASS" if ok else "FAIL")
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "solve": _cmd_solve,
        "batch": _cmd_batch,
        "examples": _cmd_examples,
        "check-derivatives": _cmd_check_derivatives,
    }
    try:
        return handlers[args.command](args)
    except (ParseError, InvalidCamera, DimensionMismatch, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
