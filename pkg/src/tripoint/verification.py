"""Post-solve optimality diagnostics.

Three ingredients:

- the intrinsic-curvature solvability test: rho^2, the reciprocal squared
  dominant eigenvalue of the normalized curvature matrix K, should be at
  least gamma^2, the cost. Evaluated at the initializer it flags hard
  problems before iterating; the margin rho^2 / gamma^2 is exposed so
  callers can demand more headroom than the plain inequality.
- the Kantorovich distance: the norm of the full Newton correction
  |H^{-1} g|, small only near a stationary point. Below
  ``KANTOROVICH_EPSILON`` (square root of the double-precision machine
  epsilon) a point counts as numerically stationary, and -log10 of the
  distance roughly counts the accurate decimal digits.
- the combined verdict: numerically optimal means stationary to double
  precision AND no worse than the linear-initializer cost.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import evaluate_residual
from .derivatives import derivative_bundle, jacobian, second_order_term
from .initializer import initial_point

KANTOROVICH_EPSILON = 1.49e-8
"""Numerical stationarity threshold, approximately sqrt(2.22e-16)."""


class RankDeficientJacobian(UserWarning):
    """Jacobian rank below 3; pseudo-inverse results are rank-limited."""


@dataclass
class OptimalityReport:
    """Diagnostics backing the optimality verdict for one solution."""

    rho_squared: float
    gamma_squared: float
    kantorovich_distance: float
    solvable_by_curvature: bool
    numerically_l2_optimal: bool
    suboptimal_reference_cost: float

    @property
    def curvature_margin(self) -> float:
        """rho^2 / gamma^2; large values mean an easy, well-curved problem."""
        if self.gamma_squared == 0.0:
            return math.inf
        return self.rho_squared / self.gamma_squared


def pseudo_inverse_jacobian(jac) -> np.ndarray:
    """Moore-Penrose pseudo-inverse of a stacked Jacobian (SVD based).

    Rank deficiency (rank < 3) is reported through a RankDeficientJacobian
    warning; the rank-r pseudo-inverse is still returned.
    """
    jac = np.asarray(jac, dtype=float)
    u, s, vt = np.linalg.svd(jac, full_matrices=False)
    cutoff = np.finfo(float).eps * max(jac.shape) * (s[0] if s.size else 0.0)
    keep = s > cutoff
    if int(np.count_nonzero(keep)) < min(jac.shape):
        warnings.warn(
            f"jacobian rank {int(np.count_nonzero(keep))} < {min(jac.shape)}",
            RankDeficientJacobian,
            stacklevel=2,
        )
    inv_s = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    return (vt.T * inv_s) @ u.T


def curvature_matrix(problem, caches, point) -> np.ndarray:
    """Normalized curvature matrix K = -(J^+)^T (sum phi_i hess phi_i) J^+.

    Symmetric by construction; the float evaluation is re-symmetrized so the
    roundoff asymmetry of the triple product (noticeable for ill-conditioned
    Jacobians) never leaks into the eigenvalue analysis.
    """
    residual = evaluate_residual(problem, point)
    j = jacobian(problem, caches, point)
    weighted = second_order_term(problem, caches, point, residual)
    j_pinv = pseudo_inverse_jacobian(j)
    k = -j_pinv.T @ weighted @ j_pinv
    return 0.5 * (k + k.T)


def solvability_check(problem, caches, point):
    """(rho^2, gamma^2, rho^2 >= gamma^2) at `point` (typically the initializer).

    rho^2 is reported as +inf when the curvature matrix vanishes (the
    zero-residual case), which always passes the check.
    """
    k = curvature_matrix(problem, caches, point)
    lam_max = float(np.max(np.abs(np.linalg.eigvalsh(k))))
    gamma_squared = evaluate_residual(problem, point).cost
    rho_squared = math.inf if lam_max == 0.0 else 1.0 / lam_max**2
    return rho_squared, gamma_squared, rho_squared >= gamma_squared


def kantorovich_from_derivatives(hessian_matrix, gradient_vector) -> float:
    """Norm of the Newton correction H^{-1} g.

    Falls back to a pseudo-inverse solve when the Hessian cannot be
    factorized (indefinite or singular).
    """
    try:
        np.linalg.cholesky(hessian_matrix)
        step = np.linalg.solve(hessian_matrix, gradient_vector)
    except np.linalg.LinAlgError:
        step = np.linalg.pinv(hessian_matrix) @ gradient_vector
    return float(np.linalg.norm(step))


def kantorovich_distance(problem, caches, point) -> float:
    """Kantorovich convergence distance of `problem` at `point`."""
    residual = evaluate_residual(problem, point)
    bundle = derivative_bundle(problem, caches, point, residual, with_hessian=True)
    return kantorovich_from_derivatives(bundle.hessian, bundle.gradient)


def optimality_verdict(kantorovich, cost, reference_cost) -> bool:
    """Numerically optimal: stationary to double precision and at or below
    the reference (initializer) cost."""
    return kantorovich <= KANTOROVICH_EPSILON and cost <= reference_cost


def optimality_report(problem, caches, solution, start=None) -> OptimalityReport:
    """Assemble the full diagnostic report for a solved point.

    The curvature test runs at `start` (the initializer point when omitted);
    the Kantorovich distance and verdict are evaluated at `solution`.
    """
    if start is None:
        start, _ = initial_point(problem)
    rho_squared, gamma_squared, solvable = solvability_check(problem, caches, start)
    reference_cost = gamma_squared
    cost = evaluate_residual(problem, solution).cost
    kantorovich = kantorovich_distance(problem, caches, solution)
    return OptimalityReport(
        rho_squared=rho_squared,
        gamma_squared=gamma_squared,
        kantorovich_distance=kantorovich,
        solvable_by_curvature=solvable,
        numerically_l2_optimal=optimality_verdict(kantorovich, cost, reference_cost),
        suboptimal_reference_cost=reference_cost,
    )
