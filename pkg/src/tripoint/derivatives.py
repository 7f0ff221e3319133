"""Exact derivatives of the reprojection residuals and cost.

Each residual pair is a ratio of affine forms in the scene point, so every
partial derivative is a polynomial in the homogeneous point divided by a
power of the projective depth. The polynomial coefficients depend only on
the camera and are precomputed once per camera (`build_cache`):

- ``determinants``: the 18 2x2 determinants of image-row/depth-row entry
  pairs, Delta[l, m, n] = p[l, m] p[3, n] - p[l, n] p[3, m] (1-based, l the
  image row in {1, 2}),
- ``j_num``: the 2x12 coefficient table of the first partials; row pair i of
  the Jacobian is j_num . kron_lift(X) / depth^2,
- ``h_num``: the 12x4 coefficient table of the six independent second
  partials of each residual; h_num . (x, y, z, 1) / depth^3 gives them in
  row-major upper-triangle order, residual u first.

`gradient` and `hessian` return J^T r and J^T J + sum_i(phi_i hess(phi_i)),
the derivatives of half the cost. Newton-type steps are unchanged by the
common factor two and every solver in this package uses this convention.

The finite-difference functions exist to audit the analytic path (tests and
the ``check-derivatives`` command); nothing in the solvers depends on them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DEPTH_EPSILON,
    DepthNearZero,
    evaluate_residual,
    homogeneous,
)

_DET_PAIRS = ((1, 2), (1, 3), (1, 4), (2, 1), (2, 3), (2, 4), (3, 1), (3, 2), (3, 4))
_HESSIAN_PAIRS = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))


@dataclass(eq=False)
class CameraDerivativeCache:
    """Constant derivative coefficient tables for one camera."""

    determinants: dict   # (image_row, m, n) -> float, 1-based indices
    j_num: np.ndarray    # (2, 12)
    h_num: np.ndarray    # (12, 4)


def build_cache(camera) -> CameraDerivativeCache:
    """Precompute the per-camera derivative coefficient tables."""
    p = camera.matrix
    c = p[2]
    # delta[l, m, j] = p[l, m] c[j] - p[l, j] c[m]; zero on the diagonal m == j
    delta = p[:2, :3, None] * c[None, None, :] - p[:2, None, :] * c[None, :3, None]
    determinants = {
        (l + 1, m, n): float(delta[l, m - 1, n - 1])
        for l in range(2)
        for m, n in _DET_PAIRS
    }
    j_num = delta.reshape(2, 12).copy()
    h_num = np.empty((2, 6, 4))
    for e, (m, k) in enumerate(_HESSIAN_PAIRS):
        h_num[:, e, :] = delta[:, m, k, None] * c[None, :] - 2.0 * c[k] * delta[:, m, :]
    return CameraDerivativeCache(determinants, j_num, h_num.reshape(12, 4))


def build_caches(problem) -> list:
    """Derivative caches for every camera of a problem, in camera order."""
    return [build_cache(camera) for camera in problem.cameras]


def kron_lift(point) -> np.ndarray:
    """12x3 block-diagonal stack of the homogeneous point, one block per axis."""
    return np.kron(np.eye(3), homogeneous(point)[:, None])


def _checked_depths(problem, x0):
    depths = problem.matrices[:, 2, :] @ x0
    small = np.abs(depths) <= DEPTH_EPSILON
    if np.any(small):
        i = int(np.argmax(small))
        raise DepthNearZero(camera_index=i, depth=depths[i])
    return depths


def jacobian(problem, caches, point) -> np.ndarray:
    """The 2n x 3 residual Jacobian, evaluated exactly from the caches."""
    x0 = homogeneous(point)
    depths = _checked_depths(problem, x0)
    coeff = np.stack([c.j_num for c in caches]).reshape(-1, 2, 3, 4)
    rows = (coeff @ x0) / (depths * depths)[:, None, None]
    return rows.reshape(-1, 3)


def gradient(problem, caches, point, residual) -> np.ndarray:
    """Half-cost gradient J^T r; `residual` must be evaluated at `point`."""
    return jacobian(problem, caches, point).T @ residual.residuals


def second_order_term(problem, caches, point, residual) -> np.ndarray:
    """The residual-weighted curvature sum, sum_i phi_i hess(phi_i)."""
    x0 = homogeneous(point)
    depths = residual.depths
    coeff = np.stack([c.h_num for c in caches]).reshape(-1, 2, 6, 4)
    entries = (coeff @ x0) / (depths ** 3)[:, None, None]
    s = np.einsum("nl,nle->e", residual.residuals.reshape(-1, 2), entries)
    return np.array([
        [s[0], s[1], s[2]],
        [s[1], s[3], s[4]],
        [s[2], s[4], s[5]],
    ])


def hessian(problem, caches, point, residual) -> np.ndarray:
    """Half-cost Hessian J^T J + sum_i(phi_i hess(phi_i)); exactly symmetric."""
    j = jacobian(problem, caches, point)
    return j.T @ j + second_order_term(problem, caches, point, residual)


@dataclass(eq=False)
class DerivativeBundle:
    """Jacobian, gradient, and curvature matrices at one point.

    ``hessian`` stays None unless a second-order method asked for it; the
    Gauss-Newton and Levenberg-Marquardt paths never build it.
    """

    jacobian: np.ndarray
    gradient: np.ndarray
    gauss_newton_matrix: np.ndarray
    hessian: np.ndarray | None = None


def derivative_bundle(problem, caches, point, residual, with_hessian=False) -> DerivativeBundle:
    """Evaluate J, g, and J^T J (plus H on request) in one pass."""
    j = jacobian(problem, caches, point)
    g = j.T @ residual.residuals
    jtj = j.T @ j
    h = None
    if with_hessian:
        h = jtj + second_order_term(problem, caches, point, residual)
    return DerivativeBundle(j, g, jtj, h)


def finite_difference_jacobian(problem, point, relative_step=1e-6) -> np.ndarray:
    """Central-difference residual Jacobian (audit tool)."""
    p = np.asarray(point, dtype=float)
    columns = []
    for m in range(3):
        h = relative_step * (1.0 + abs(p[m]))
        e = np.zeros(3)
        e[m] = h
        rp = evaluate_residual(problem, p + e).residuals
        rm = evaluate_residual(problem, p - e).residuals
        columns.append((rp - rm) / (2.0 * h))
    return np.stack(columns, axis=1)


def finite_difference_gradient(problem, point, relative_step=1e-6) -> np.ndarray:
    """Central differences of half the cost (matches `gradient`)."""
    p = np.asarray(point, dtype=float)
    g = np.zeros(3)
    for m in range(3):
        h = relative_step * (1.0 + abs(p[m]))
        e = np.zeros(3)
        e[m] = h
        fp = evaluate_residual(problem, p + e).cost
        fm = evaluate_residual(problem, p - e).cost
        g[m] = (fp - fm) / (4.0 * h)
    return g


def finite_difference_hessian(problem, caches, point, relative_step=1e-6) -> np.ndarray:
    """Central differences of the analytic gradient (matches `hessian`)."""
    p = np.asarray(point, dtype=float)
    h_mat = np.zeros((3, 3))
    for m in range(3):
        h = relative_step * (1.0 + abs(p[m]))
        e = np.zeros(3)
        e[m] = h
        gp = gradient(problem, caches, p + e, evaluate_residual(problem, p + e))
        gm = gradient(problem, caches, p - e, evaluate_residual(problem, p - e))
        h_mat[:, m] = (gp - gm) / (2.0 * h)
    return h_mat
