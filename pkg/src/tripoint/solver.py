"""Newton-type solvers for the triangulation cost, from a symmedian start.

Five cores share one outer loop:

- ``newton_raphson``: full-Hessian steps, falling back to the Gauss-Newton
  step on iterations where the Hessian is not positive definite,
- ``gauss_newton`` and ``levenberg_marquardt``: first-order information
  only; the Levenberg damping is refreshed every iteration as
  mu = |r|^delta with delta in (1, 2),
- ``gn_line_search`` and ``gn_trust_region``: Gauss-Newton smoothly
  hybridized with a globalization that engages only on iterations whose
  plain step would increase the cost (with strict_monotone=False, only on
  steps that would end above the starting cost, which can produce
  non-monotone accepted traces). The line search backtracks alpha through
  powers of delta and accepts on a cubic sufficient-decrease test; the
  trust region solves its subproblem by Steihaug-truncated conjugate
  gradients with the usual very-successful / successful / reject radius
  schedule.

Every report carries the Kantorovich distance of the final iterate, and a
run is labeled `converged` exactly when that distance certifies numerical
stationarity (below the double-precision threshold). A vanishing gradient
alone does not qualify: on gross-outlier problems whose optimum escapes to
infinity the gradient collapses with the scale while the Newton correction
stays enormous, and those runs are reported as `max_iterations`.
"""

from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np

from .core import DEPTH_EPSILON
from .derivatives import build_caches
from .initializer import SingularCamera, initial_point
from .verification import KANTOROVICH_EPSILON, kantorovich_from_derivatives

METHODS = (
    "newton_raphson",
    "gauss_newton",
    "levenberg_marquardt",
    "gn_line_search",
    "gn_trust_region",
)

STATUSES = ("converged", "max_iterations", "degenerate_geometry", "depth_degenerate")


class SingularSystem(np.linalg.LinAlgError):
    """A step system could not be factorized; stationary-geometry pathology."""


@dataclass
class LineSearchConfig:
    gamma: float = 0.01
    delta: float = 0.25
    max_backtracks: int = 20
    classical: bool = False  # use f + gamma*alpha*(g.d) instead of the cubic bound

    def __post_init__(self):
        if not 0.0 < self.gamma < 0.5:
            raise ValueError("line search gamma must lie in (0, 0.5)")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("line search delta must lie in (0, 1)")
        if self.max_backtracks < 1:
            raise ValueError("max_backtracks must be positive")


@dataclass
class TrustRegionConfig:
    initial_radius: float = 1.0
    eta_s: float = 0.1
    eta_v: float = 0.9
    gamma_inc: float = 4.0
    gamma_red: float = 0.25
    inner_eps: float = 1e-8
    max_inner: int = 100

    def __post_init__(self):
        if not self.eta_s < self.eta_v:
            raise ValueError("trust region thresholds need eta_s < eta_v")
        if self.initial_radius <= 0.0:
            raise ValueError("initial radius must be positive")


@dataclass
class SolverConfig:
    method: str = "gn_line_search"
    gradient_tol: float = 1e-10
    step_tol: float = 1e-14          # relative to 1 + |x|
    max_iterations: int = 50
    line_search: LineSearchConfig = field(default_factory=LineSearchConfig)
    trust_region: TrustRegionConfig = field(default_factory=TrustRegionConfig)
    lm_delta_exponent: float = 1.5
    # True: globalize whenever the plain step fails descent (monotone traces).
    # False: globalize only above the starting cost f(X_0).
    strict_monotone: bool = True
    collect_trace: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; pick one of {METHODS}")
        if not 1.0 < self.lm_delta_exponent < 2.0:
            raise ValueError("lm_delta_exponent must lie in (1, 2)")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")


@dataclass
class TraceEntry:
    """One accepted (or stalled) outer iteration.

    ``cost`` is the cost after the step, ``gradient_norm`` the norm used to
    build the step (before it). ``globalization_engaged`` marks iterations
    where the plain Gauss-Newton step was rejected by the hybridization
    test; ``note`` carries fallback/exhaustion details.
    """

    iteration: int
    cost: float
    gradient_norm: float
    step_norm: float
    globalization_engaged: bool
    note: str = ""


@dataclass(eq=False)
class SolveReport:
    solution: np.ndarray
    cost: float
    initial_cost: float
    iterations: int
    status: str
    gradient_norm: float
    kantorovich_distance: float
    start_point: np.ndarray | None = None
    initializer_fallback: bool = False
    trace: list | None = None


def newton_step(grad, hess) -> np.ndarray:
    """Full Newton step solving hess d = -grad by Cholesky.

    A tiny Tikhonov shift (1e-12 * |trace|) is retried once; if both
    factorizations fail the curvature is indefinite or singular and
    SingularSystem is raised.
    """
    hess = np.asarray(hess, dtype=float)
    for shift in (0.0, 1e-12 * abs(float(np.trace(hess)))):
        shifted = hess if shift == 0.0 else hess + shift * np.eye(3)
        try:
            np.linalg.cholesky(shifted)
        except np.linalg.LinAlgError:
            continue
        return np.linalg.solve(shifted, -np.asarray(grad, dtype=float))
    raise SingularSystem("Hessian not positive definite within shift tolerance")


def gauss_newton_step(grad, gn_matrix) -> np.ndarray:
    """Gauss-Newton step solving (J^T J) s = -grad.

    The normal matrix is PSD by construction; when its factorization fails a
    Tikhonov shift is attempted and SingularSystem raised if the shifted
    system is still effectively singular (condition above 1e14).
    """
    grad = np.asarray(grad, dtype=float)
    if not grad.any():
        return np.zeros(3)
    gn_matrix = np.asarray(gn_matrix, dtype=float)
    try:
        np.linalg.cholesky(gn_matrix)
        return np.linalg.solve(gn_matrix, -grad)
    except np.linalg.LinAlgError:
        pass
    shifted = gn_matrix + 1e-12 * float(np.trace(gn_matrix)) * np.eye(3)
    w = np.linalg.eigvalsh(shifted)
    if w[0] <= 0.0 or w[-1] / w[0] > 1e14:
        raise SingularSystem("normal matrix effectively singular")
    return np.linalg.solve(shifted, -grad)


def lm_step(grad, gn_matrix, mu) -> np.ndarray:
    """Damped least-squares step -(J^T J + mu I)^{-1} grad, mu >= 0."""
    if mu < 0.0:
        raise ValueError("damping mu must be nonnegative")
    if mu == 0.0:
        return gauss_newton_step(grad, gn_matrix)
    return np.linalg.solve(
        np.asarray(gn_matrix, dtype=float) + mu * np.eye(3),
        -np.asarray(grad, dtype=float),
    )


def _armijo(point, direction, cost_fn, f_start, cfg, slope=None):
    """Backtracking loop; returns (alpha, trial cost, exhausted)."""
    cubic = cfg.gamma * float(np.linalg.norm(direction)) ** 3
    alpha = 1.0
    f_trial = math.inf
    for i in range(cfg.max_backtracks):
        alpha = cfg.delta**i
        f_trial = cost_fn(point + alpha * direction)
        if cfg.classical and slope is not None:
            bound = f_start + cfg.gamma * alpha * slope
        else:
            bound = f_start - cubic * alpha**3
        if f_trial <= bound:
            return alpha, f_trial, False
    return alpha, f_trial, True


def armijo_line_search(iteration, point, direction, cost_fn, config=None, slope=None) -> float:
    """Backtracking step length along `direction` from `point`.

    Tries alpha = delta**i for i = 0 .. max_backtracks-1 and returns the
    first alpha whose trial cost meets the sufficient-decrease bound
        f(x + alpha d) <= f(x) - gamma alpha^3 |d|^3;
    on exhaustion the last (smallest) alpha is returned. With
    config.classical=True and `slope` = g . d the classical bound
    f(x) + gamma alpha slope is used instead. `iteration` is accepted for
    call compatibility with the outer loop and does not affect the result.
    """
    del iteration
    cfg = config or LineSearchConfig()
    point = np.asarray(point, dtype=float)
    direction = np.asarray(direction, dtype=float)
    alpha, _, _ = _armijo(point, direction, cost_fn, float(cost_fn(point)), cfg, slope)
    return alpha


def _positive_boundary_root(z, d, radius):
    """tau >= 0 with |z + tau d| = radius."""
    a = float(d @ d)
    if a == 0.0:
        return 0.0
    b = 2.0 * float(z @ d)
    c = float(z @ z) - radius * radius
    disc = max(b * b - 4.0 * a * c, 0.0)
    return (-b + math.sqrt(disc)) / (2.0 * a)


def _steihaug(grad, model_matrix, radius):
    """Truncated conjugate gradients on min g.s + 0.5 s.B.s within the radius."""
    z = np.zeros(3)
    r = np.asarray(grad, dtype=float).copy()
    rr = float(r @ r)
    if rr == 0.0:
        return z
    rr0 = rr
    d = -r
    for _ in range(8):  # dimension 3: CG is exact in <= 3 steps, rest is slack
        bd = model_matrix @ d
        kappa = float(d @ bd)
        if kappa <= 0.0:
            return z + _positive_boundary_root(z, d, radius) * d
        alpha = rr / kappa
        z_next = z + alpha * d
        if float(np.linalg.norm(z_next)) >= radius:
            return z + _positive_boundary_root(z, d, radius) * d
        z = z_next
        r = r + alpha * bd
        rr_next = float(r @ r)
        if rr_next <= 1e-20 * rr0:
            break
        d = -r + (rr_next / rr) * d
        rr = rr_next
    return z


_TrustRegionResult = namedtuple(
    "_TrustRegionResult", "step iterations final_radius accepted"
)


def _trust_region(grad0, model0, x0, cost_fn, model_fn, cfg):
    """Adaptive-radius inner loop; returns the accumulated accepted step.

    The predicted reduction is measured on the full cost: with g and B the
    half-cost gradient and curvature model, the quadratic prediction for
    f(x) - f(x + s) is -(2 g.s + s.B.s), which makes the acceptance ratio
    exactly one when the model is exact (linear residuals).
    """
    g = np.asarray(grad0, dtype=float)
    b = np.asarray(model0, dtype=float)
    x = np.asarray(x0, dtype=float).copy()
    if float(np.linalg.norm(g)) <= cfg.inner_eps:
        return _TrustRegionResult(np.zeros(3), 0, cfg.initial_radius, False)
    f = float(cost_fn(x))
    radius = cfg.initial_radius
    accepted = False
    i = 0
    for i in range(1, cfg.max_inner + 1):
        s = _steihaug(g, b, radius)
        predicted = -(2.0 * float(g @ s) + float(s @ (b @ s)))
        if not math.isfinite(predicted) or predicted <= 0.0:
            break
        f_trial = float(cost_fn(x + s))
        rho = (f - f_trial) / predicted
        moved = False
        if rho >= cfg.eta_v:
            x, f, moved = x + s, f_trial, True
            radius *= cfg.gamma_inc
        elif rho >= cfg.eta_s:
            x, f, moved = x + s, f_trial, True
        else:
            radius *= cfg.gamma_red
            if radius <= 1e-16 * (1.0 + float(np.linalg.norm(x))):
                break
        if moved:
            accepted = True
            if model_fn is not None:
                g, b = model_fn(x)
        if float(np.linalg.norm(g)) <= cfg.inner_eps:
            break
    return _TrustRegionResult(x - np.asarray(x0, dtype=float), i, radius, accepted)


def trust_region_step(gradient_k, model_matrix, point, cost_fn, model_fn=None, config=None) -> np.ndarray:
    """Globalized step from `point` via the adaptive-radius inner loop.

    `model_fn(x) -> (gradient, model_matrix)` refreshes the quadratic model
    at accepted inner iterates; when omitted the initial model is kept
    throughout. Returns the accumulated accepted displacement (zero when no
    inner step was accepted).
    """
    cfg = config or TrustRegionConfig()
    return _trust_region(gradient_k, model_matrix, point, cost_fn, model_fn, cfg).step


class _Workspace:
    """Contiguous per-problem arrays for the solver hot loop."""

    __slots__ = ("n", "third_rows", "top_rows", "image_points", "jnum", "hnum", "_caches")

    def __init__(self, problem, caches):
        mats = problem.matrices
        self.n = len(caches)
        self.third_rows = np.ascontiguousarray(mats[:, 2, :])
        self.top_rows = np.ascontiguousarray(mats[:, :2, :])
        self.image_points = problem.image_points
        self.jnum = np.ascontiguousarray(
            np.stack([c.j_num for c in caches]).reshape(self.n, 2, 3, 4)
        )
        self.hnum = None
        self._caches = caches

    def residual(self, x):
        """(residuals, depths, cost), or None when any depth is degenerate."""
        x0 = np.array((x[0], x[1], x[2], 1.0))
        depths = self.third_rows @ x0
        if float(np.min(np.abs(depths))) <= DEPTH_EPSILON:
            return None
        res = ((self.top_rows @ x0) / depths[:, None] - self.image_points).ravel()
        return res, depths, float(res @ res)

    def cost(self, x):
        ev = self.residual(x)
        return math.inf if ev is None else ev[2]

    def jacobian(self, x, depths):
        x0 = np.array((x[0], x[1], x[2], 1.0))
        return ((self.jnum @ x0) / (depths * depths)[:, None, None]).reshape(-1, 3)

    def second_term(self, x, depths, res):
        if self.hnum is None:
            self.hnum = np.ascontiguousarray(
                np.stack([c.h_num for c in self._caches]).reshape(self.n, 2, 6, 4)
            )
        x0 = np.array((x[0], x[1], x[2], 1.0))
        entries = (self.hnum @ x0) / (depths**3)[:, None, None]
        s = np.einsum("nl,nle->e", res.reshape(-1, 2), entries)
        return np.array([
            [s[0], s[1], s[2]],
            [s[1], s[3], s[4]],
            [s[2], s[4], s[5]],
        ])


def _report(solution, cost, initial_cost, iterations, status, gradient_norm,
            kantorovich, start, fallback, trace):
    return SolveReport(
        solution=np.asarray(solution, dtype=float).copy(),
        cost=cost,
        initial_cost=initial_cost,
        iterations=iterations,
        status=status,
        gradient_norm=gradient_norm,
        kantorovich_distance=kantorovich,
        start_point=None if start is None else np.asarray(start, dtype=float).copy(),
        initializer_fallback=fallback,
        trace=trace,
    )


def solve(problem, config=None, caches=None) -> SolveReport:
    """Triangulate one problem: symmedian start plus the configured core.

    Geometric degeneracies never raise; they are reported through
    SolveReport.status (`degenerate_geometry` when no initial point can be
    built, `depth_degenerate` when the cost is undefined at every trial
    point). Precomputed derivative caches may be passed to amortize camera
    setup across many problems sharing cameras.
    """
    cfg = config or SolverConfig()
    if caches is None:
        caches = build_caches(problem)
    ws = _Workspace(problem, caches)
    trace = [] if cfg.collect_trace else None

    try:
        x, fallback = initial_point(problem)
    except SingularCamera:
        return _report(np.full(3, np.nan), math.inf, math.inf, 0,
                       "degenerate_geometry", math.inf, math.inf, None, True, trace)
    start = x
    ev = ws.residual(x)
    if ev is None:
        return _report(x, math.inf, math.inf, 0, "depth_degenerate",
                       math.inf, math.inf, start, fallback, trace)
    res, depths, f = ev
    f0 = f

    plain = cfg.method in ("newton_raphson", "gauss_newton", "levenberg_marquardt")
    iterations = 0
    stall = 0
    for k in range(cfg.max_iterations):
        jac = ws.jacobian(x, depths)
        grad = jac.T @ res
        g_norm = float(np.linalg.norm(grad))
        if g_norm <= cfg.gradient_tol:
            break
        jtj = jac.T @ jac
        engaged = False
        note = ""
        candidate = None
        trial = None
        try:
            if cfg.method == "newton_raphson":
                hess = jtj + ws.second_term(x, depths, res)
                try:
                    d = newton_step(grad, hess)
                except SingularSystem:
                    d = gauss_newton_step(grad, jtj)
                    note = "hessian_not_pd_gauss_newton_fallback"
                candidate = x + d
                trial = ws.residual(candidate)
            elif cfg.method == "gauss_newton":
                candidate = x + gauss_newton_step(grad, jtj)
                trial = ws.residual(candidate)
            elif cfg.method == "levenberg_marquardt":
                mu = float(np.linalg.norm(res)) ** cfg.lm_delta_exponent
                candidate = x + lm_step(grad, jtj, mu)
                trial = ws.residual(candidate)
            else:
                step = gauss_newton_step(grad, jtj)
                candidate = x + step
                trial = ws.residual(candidate)
                ceiling = f if cfg.strict_monotone else f0
                if trial is None or trial[2] > ceiling:
                    engaged = True
                    if cfg.method == "gn_line_search":
                        slope = float(grad @ step) if cfg.line_search.classical else None
                        alpha, _, exhausted = _armijo(
                            x, step, ws.cost, f, cfg.line_search, slope
                        )
                        if exhausted:
                            note = "line_search_exhausted"
                        candidate = x + alpha * step
                        trial = ws.residual(candidate)
                    else:
                        def model_fn(xx):
                            ev2 = ws.residual(xx)
                            jac2 = ws.jacobian(xx, ev2[1])
                            return jac2.T @ ev2[0], jac2.T @ jac2

                        result = _trust_region(
                            grad, jtj, x, ws.cost, model_fn, cfg.trust_region
                        )
                        if not result.accepted:
                            note = "trust_region_no_progress"
                            trial = None
                        else:
                            candidate = x + result.step
                            trial = ws.residual(candidate)
        except SingularSystem:
            note = "singular_step_system"
            trial = None

        if trial is None:
            stall += 1
            iterations = k + 1
            if trace is not None:
                trace.append(TraceEntry(k, f, g_norm, 0.0, engaged,
                                        note or "invalid_candidate"))
            if plain or stall >= 2:
                break
            continue

        stall = 0
        step_vec = candidate - x
        step_norm = float(np.linalg.norm(step_vec))
        x, (res, depths, f) = candidate, trial
        iterations = k + 1
        if trace is not None:
            trace.append(TraceEntry(k, f, g_norm, step_norm, engaged, note))
        if step_norm <= cfg.step_tol * (1.0 + float(np.linalg.norm(x))):
            break

    jac = ws.jacobian(x, depths)
    grad = jac.T @ res
    g_norm = float(np.linalg.norm(grad))
    hess = jac.T @ jac + ws.second_term(x, depths, res)
    kantorovich = kantorovich_from_derivatives(hess, grad)
    status = "converged" if kantorovich <= KANTOROVICH_EPSILON else "max_iterations"
    return _report(x, f, f0, iterations, status, g_norm, kantorovich,
                   start, fallback, trace)
