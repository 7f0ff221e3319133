"""Solve the bundled four-camera synthetic suite and inspect the results.

The sa2/sa3/sa4 cases observe the image origin in 2, 3, 4 cameras; `con` is
the conservative case on which the non-iterative tfml reference method
returns a certified-suboptimal answer. Run:

    python demos/synthetic_suite.py
"""

import numpy as np

import tripoint as tp

for name in ("sa2", "sa3", "sa4", "con"):
    problem = tp.benchmark_problem(name)
    caches = tp.build_caches(problem)
    report = tp.solve(problem, tp.SolverConfig(collect_trace=True), caches)
    diag = tp.optimality_report(problem, caches, report.solution,
                                start=report.start_point)
    expected_xyz, expected_cost = tp.BENCHMARK_EXPECTED[name]

    print(f"== {name} ({problem.n} views) ==")
    print(f"  start (symmedian): {np.round(report.start_point, 12)} "
          f"cost {report.initial_cost:.12f}")
    print(f"  solution:          {report.solution} in {report.iterations} iterations")
    print(f"  reprojection error {report.cost:.15f} "
          f"(reference {expected_cost:.15f})")
    print(f"  gradient norm {report.gradient_norm:.2e}, "
          f"Kantorovich distance {report.kantorovich_distance:.2e}")
    print(f"  curvature test rho^2={diag.rho_squared:.4f} vs "
          f"gamma^2={diag.gamma_squared:.4f} -> "
          f"{'easy' if diag.solvable_by_curvature else 'flagged hard'}")
    print(f"  numerically optimal: {diag.numerically_l2_optimal}")
    print()

print("the `con` optimum against the tfml reference answer:")
report = tp.solve(tp.benchmark_problem("con"))
print(f"  iterative cost {report.cost:.15f} vs tfml {tp.CON_TFML_COST:.15f} "
      f"(margin {tp.CON_TFML_COST - report.cost:.6f})")
