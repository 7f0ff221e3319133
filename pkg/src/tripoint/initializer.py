"""Closed-form linear initialization from back-projected viewing rays.

Each camera/observation pair factors into the 3D ray of points that project
onto the observation. The initial estimate is the point with the least sum
of squared perpendicular distances to all rays; it solves one symmetric 3x3
linear system and is exact for noise-free data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_CONDITION_LIMIT = 1e12
_DETERMINANT_FLOOR = 1e-14


class SingularCamera(ValueError):
    """Left 3x3 camera block is numerically rank deficient."""


class ParallelRays(ValueError):
    """All viewing rays are numerically parallel; the normal matrix is singular."""


@dataclass(eq=False)
class Ray:
    """Oriented line anchor + t * direction; unit direction, t > 0 in front."""

    anchor: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        self.anchor = np.asarray(self.anchor, dtype=float)
        self.direction = np.asarray(self.direction, dtype=float)
        if not np.all(np.isfinite(self.anchor)):
            raise ValueError("ray anchor must be finite")
        if abs(np.linalg.norm(self.direction) - 1.0) > 1e-12:
            raise ValueError("ray direction must have unit norm")


def factor_camera(camera, observation) -> Ray:
    """Camera center and oriented viewing ray through one observation.

    The anchor is the camera center -M^{-1} p4; the direction back-projects
    the observation and is oriented so points in front of the camera sit at
    positive ray parameter.
    """
    m = camera.matrix[:, :3]
    det = np.linalg.det(m)
    if abs(det) <= _DETERMINANT_FLOOR * np.linalg.norm(m) ** 3:
        raise SingularCamera(
            f"camera {camera.label!r}: left 3x3 block determinant {det:.3e} "
            "too small to factor"
        )
    m_inv = np.linalg.inv(m)
    anchor = -m_inv @ camera.matrix[:, 3]
    w = m_inv @ np.array([observation.u, observation.v, 1.0])
    w = w / np.linalg.norm(w)
    ahead = anchor + w
    if camera.matrix[2, :3] @ ahead + camera.matrix[2, 3] < 0.0:
        w = -w
    return Ray(anchor, w)


def ray_projection(ray: Ray) -> np.ndarray:
    """Orthogonal projector onto the plane normal to the ray direction.

    Symmetric, idempotent, rank 2; maps the direction itself to zero, so
    |projector @ (x - anchor)| is the point-to-ray distance.
    """
    w = ray.direction
    return np.eye(3) - np.outer(w, w)


def symmedian_point(rays) -> np.ndarray:
    """Point minimizing the summed squared distances to all rays.

    Solves (sum_i P_i) x = sum_i P_i anchor_i through a full symmetric
    eigendecomposition (the matrix is 3x3 positive semidefinite). Raises
    ParallelRays when its condition number exceeds 1e12, which happens only
    for (near-)parallel ray bundles.
    """
    rays = list(rays)
    if len(rays) < 2:
        raise ValueError("need at least two rays")
    a = np.zeros((3, 3))
    b = np.zeros(3)
    for ray in rays:
        projector = ray_projection(ray)
        a += projector
        b += projector @ ray.anchor
    w, q = np.linalg.eigh(a)
    if w[-1] <= 0.0 or w[0] <= w[-1] / _CONDITION_LIMIT:
        raise ParallelRays(
            "ray normal matrix is numerically singular "
            f"(eigenvalues {w[0]:.3e} .. {w[-1]:.3e})"
        )
    return q @ ((q.T @ b) / w)


def initial_point(problem):
    """Symmedian starting point for a triangulation problem.

    Returns (point, degenerate). On ParallelRays the fallback is the
    midpoint of the two closest camera centers, with degenerate=True so the
    caller can flag the result; iteration may still be attempted from it.
    """
    rays = [
        factor_camera(camera, obs)
        for camera, obs in zip(problem.cameras, problem.observations)
    ]
    try:
        return symmedian_point(rays), False
    except ParallelRays:
        anchors = np.array([ray.anchor for ray in rays])
        diff = anchors[:, None, :] - anchors[None, :, :]
        dist2 = np.einsum("ijk,ijk->ij", diff, diff)
        np.fill_diagonal(dist2, np.inf)
        i, j = np.unravel_index(int(np.argmin(dist2)), dist2.shape)
        return 0.5 * (anchors[i] + anchors[j]), True
