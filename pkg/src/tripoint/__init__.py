"""Multi-view L2 triangulation.

Recovers a 3D scene point from n >= 2 calibrated pinhole views by
minimizing the total squared reprojection error: symmedian-point linear
initialization, exact symbolic-numeric derivatives, globalized Newton-type
iteration, and numerical-optimality diagnostics.
"""

from .core import (
    DEPTH_EPSILON,
    CameraMatrix,
    DepthNearZero,
    ImageObservation,
    ResidualEvaluation,
    ScenePoint,
    TriangulationProblem,
    evaluate_cost,
    evaluate_residual,
    homogeneous,
    project,
)
from .derivatives import (
    CameraDerivativeCache,
    DerivativeBundle,
    build_cache,
    build_caches,
    derivative_bundle,
    finite_difference_gradient,
    finite_difference_hessian,
    finite_difference_jacobian,
    gradient,
    hessian,
    jacobian,
    kron_lift,
    second_order_term,
)
from .initializer import (
    ParallelRays,
    Ray,
    SingularCamera,
    factor_camera,
    initial_point,
    ray_projection,
    symmedian_point,
)
from .solver import (
    METHODS,
    LineSearchConfig,
    SingularSystem,
    SolveReport,
    SolverConfig,
    TraceEntry,
    TrustRegionConfig,
    armijo_line_search,
    gauss_newton_step,
    lm_step,
    newton_step,
    solve,
    trust_region_step,
)
from .verification import (
    KANTOROVICH_EPSILON,
    OptimalityReport,
    RankDeficientJacobian,
    curvature_matrix,
    kantorovich_distance,
    kantorovich_from_derivatives,
    optimality_report,
    optimality_verdict,
    pseudo_inverse_jacobian,
    solvability_check,
)
from .datasets import (
    Dataset,
    DimensionMismatch,
    InvalidCamera,
    ParseError,
    Track,
    load_problem_file,
    parse_native_problem,
    parse_vgg_dataset,
)
from .batch import (
    AggregateRow,
    BatchReport,
    BatchTotals,
    TrackRecord,
    emit_report,
    report_from_json,
    run_batch,
)
from .synthetic import (
    BENCHMARK_EXPECTED,
    CON_TFML_COST,
    benchmark_dataset,
    benchmark_problem,
    benchmark_problem_text,
    random_dataset,
    random_scene,
)

__version__ = "0.1.0"
