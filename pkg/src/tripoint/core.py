"""Pinhole cameras, projection, and the reprojection-error cost.

Conventions used throughout the package:

- scene points are length-3 float arrays; the homogeneous lift (x, y, z, 1)
  is formed on demand and never stored,
- residuals stack camera by camera as (du_1, dv_1, du_2, dv_2, ...), with
  du_i = u_hat_i - u_i (predicted minus observed),
- the cost is the plain sum of squared residual entries.

A negative projective depth (point behind a camera) is not an error here:
the residual algebra stays well defined and solver iterates may transiently
cross a principal plane. Only a depth within ``DEPTH_EPSILON`` of zero makes
the projection undefined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEPTH_EPSILON = 1e-12
"""Absolute depth threshold below which a projection is degenerate."""

ScenePoint = np.ndarray
"""Scene points are plain length-3 float arrays (see module docstring)."""


class DepthNearZero(ValueError):
    """Point lies (numerically) on a camera's principal plane."""

    def __init__(self, camera_index=None, depth=0.0):
        self.camera_index = camera_index
        self.depth = depth
        where = "camera" if camera_index is None else f"camera {camera_index}"
        super().__init__(
            f"projective depth {depth:.3e} of {where} is within "
            f"{DEPTH_EPSILON:g} of zero; projection undefined"
        )


def homogeneous(point) -> np.ndarray:
    """Lift a scene point (x, y, z) to homogeneous coordinates (x, y, z, 1)."""
    x, y, z = point
    return np.array([x, y, z, 1.0])


@dataclass(eq=False)
class CameraMatrix:
    """A 3x4 pinhole projection matrix with an opaque label."""

    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (3, 4):
            raise ValueError(f"camera matrix must be 3x4, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("camera matrix entries must be finite")
        self.matrix = m

    @property
    def left_block(self) -> np.ndarray:
        """The leading 3x3 submatrix."""
        return self.matrix[:, :3]


@dataclass(eq=False)
class ImageObservation:
    """An observed pixel position (u, v) tagged with its camera label."""

    u: float
    v: float
    label: str = ""

    def __post_init__(self):
        self.u = float(self.u)
        self.v = float(self.v)
        if not (math.isfinite(self.u) and math.isfinite(self.v)):
            raise ValueError("observation coordinates must be finite")


@dataclass(eq=False)
class TriangulationProblem:
    """n >= 2 cameras with index-aligned observations of one scene point."""

    cameras: tuple
    observations: tuple

    def __post_init__(self):
        self.cameras = tuple(self.cameras)
        self.observations = tuple(self.observations)
        if len(self.cameras) != len(self.observations):
            raise ValueError("cameras and observations must align by index")
        if len(self.cameras) < 2:
            raise ValueError("triangulation needs at least two views")
        # stacked copies for vectorized evaluation
        self.matrices = np.ascontiguousarray(
            np.stack([c.matrix for c in self.cameras])
        )
        self.image_points = np.array([[o.u, o.v] for o in self.observations])

    @property
    def n(self) -> int:
        return len(self.cameras)

    @classmethod
    def from_arrays(cls, matrices, image_points, labels=None):
        """Build a problem from an (n, 3, 4) camera stack and (n, 2) points."""
        matrices = np.asarray(matrices, dtype=float)
        image_points = np.asarray(image_points, dtype=float)
        if labels is None:
            labels = [f"cam{i}" for i in range(len(matrices))]
        cameras = tuple(CameraMatrix(m, lab) for m, lab in zip(matrices, labels))
        observations = tuple(
            ImageObservation(u, v, lab) for (u, v), lab in zip(image_points, labels)
        )
        return cls(cameras, observations)


@dataclass(eq=False)
class ResidualEvaluation:
    """Residual vector, projective depths, and cost at one scene point."""

    residuals: np.ndarray  # (2n,)
    depths: np.ndarray     # (n,)
    cost: float


def project(camera: CameraMatrix, point):
    """Project a scene point through one camera.

    Returns (u_hat, v_hat, depth). Raises DepthNearZero when the point sits
    on the camera's principal plane; a negative depth projects normally.
    """
    h = camera.matrix @ homogeneous(point)
    if abs(h[2]) <= DEPTH_EPSILON:
        raise DepthNearZero(depth=h[2])
    return h[0] / h[2], h[1] / h[2], h[2]


def evaluate_residual(problem: TriangulationProblem, point) -> ResidualEvaluation:
    """Residual vector, depths, and cost of `problem` at `point`.

    Residual entries (2i, 2i+1) are the (u, v) mismatches of camera i, in
    camera order. Raises DepthNearZero (with the camera index) when any
    depth is degenerate.
    """
    p = np.asarray(point, dtype=float)
    if not np.all(np.isfinite(p)):
        raise ValueError("scene point must be finite")
    x0 = np.array([p[0], p[1], p[2], 1.0])
    depths = problem.matrices[:, 2, :] @ x0
    small = np.abs(depths) <= DEPTH_EPSILON
    if np.any(small):
        i = int(np.argmax(small))
        raise DepthNearZero(camera_index=i, depth=depths[i])
    predicted = (problem.matrices[:, :2, :] @ x0) / depths[:, None]
    residuals = (predicted - problem.image_points).ravel()
    return ResidualEvaluation(residuals, depths, float(residuals @ residuals))


def evaluate_cost(problem: TriangulationProblem, point) -> float:
    """Total squared reprojection error at `point`."""
    return evaluate_residual(problem, point).cost
