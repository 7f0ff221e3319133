import itertools

import numpy as np
import pytest

import tripoint as tp


def distances_squared(rays, point):
    return sum(
        float(np.linalg.norm(tp.ray_projection(r) @ (point - r.anchor)) ** 2)
        for r in rays
    )


def test_factor_canonical_camera(identity_camera):
    ray = tp.factor_camera(identity_camera, tp.ImageObservation(0.0, 0.0))
    assert np.array_equal(ray.anchor, [0.0, 0.0, 0.0])
    assert np.array_equal(ray.direction, [0.0, 0.0, 1.0])


def test_factor_benchmark_p1():
    # hand inversion: identity left block, fourth column (0, 0, 1)
    camera = tp.benchmark_problem("sa2").cameras[0]
    ray = tp.factor_camera(camera, tp.ImageObservation(0.0, 0.0))
    assert np.allclose(ray.anchor, [0.0, 0.0, -1.0], atol=1e-15)
    assert np.allclose(ray.direction, [0.0, 0.0, 1.0], atol=1e-15)


def test_factor_round_trip_random_cameras():
    rng = np.random.default_rng(0)
    for _ in range(50):
        problem, _ = tp.random_scene(2, noise=0.3, rng=rng)
        for camera, obs in zip(problem.cameras, problem.observations):
            ray = tp.factor_camera(camera, obs)
            for t in (0.5, 1.0, 7.0):
                u, v, depth = tp.project(camera, ray.anchor + t * ray.direction)
                assert depth > 0.0  # oriented toward the scene
                assert abs(u - obs.u) <= 1e-10
                assert abs(v - obs.v) <= 1e-10


def test_factor_singular_camera():
    camera = tp.CameraMatrix([[1, 0, 0, 0], [2, 0, 0, 0], [0, 0, 1, 1]])
    with pytest.raises(tp.SingularCamera):
        tp.factor_camera(camera, tp.ImageObservation(0.0, 0.0))


def test_ray_projection_axis():
    ray = tp.Ray([0.0, 0.0, 0.0], [0.0, 0.0, 1.0])
    assert np.array_equal(tp.ray_projection(ray), np.diag([1.0, 1.0, 0.0]))


def test_ray_projection_diagonal_direction():
    w = np.ones(3) / np.sqrt(3.0)
    projector = tp.ray_projection(tp.Ray([0.0, 0.0, 0.0], w))
    expected = np.eye(3) - np.outer(w, w)  # 2/3 diagonal, -1/3 off-diagonal
    assert np.allclose(projector, expected, atol=1e-15)
    assert np.allclose(np.diag(projector), 2.0 / 3.0)


def test_ray_projection_spectrum_and_idempotence():
    rng = np.random.default_rng(1)
    for _ in range(20):
        w = rng.normal(size=3)
        w /= np.linalg.norm(w)
        projector = tp.ray_projection(tp.Ray(rng.normal(size=3), w))
        assert np.allclose(projector, projector.T, atol=1e-15)
        assert np.allclose(projector @ projector, projector, atol=1e-14)
        assert np.allclose(projector @ w, 0.0, atol=1e-14)
        eigenvalues = np.sort(np.linalg.eigvalsh(projector))
        assert np.allclose(eigenvalues, [0.0, 1.0, 1.0], atol=1e-12)


def test_ray_requires_unit_direction():
    with pytest.raises(ValueError):
        tp.Ray([0.0, 0.0, 0.0], [0.0, 0.0, 2.0])


def test_symmedian_two_axes_meet_at_origin():
    rays = [
        tp.Ray([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]),
        tp.Ray([0.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
    ]
    assert np.allclose(tp.symmedian_point(rays), 0.0, atol=1e-15)


def test_symmedian_parallel_rays_raise():
    rays = [
        tp.Ray([1.0, 0.0, 0.0], [0.0, 0.0, 1.0]),
        tp.Ray([-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]),
    ]
    with pytest.raises(tp.ParallelRays):
        tp.symmedian_point(rays)


def test_symmedian_requires_two_rays():
    with pytest.raises(ValueError):
        tp.symmedian_point([tp.Ray([0.0, 0.0, 0.0], [1.0, 0.0, 0.0])])


def test_symmedian_orthogonal_offset_rays_against_grid_search():
    rays = [
        tp.Ray([0.0, 1.0, 1.3], [1.0, 0.0, 0.0]),
        tp.Ray([1.2, 0.0, 1.0], [0.0, 1.0, 0.0]),
        tp.Ray([1.0, 0.8, 0.0], [0.0, 0.0, 1.0]),
    ]
    estimate = tp.symmedian_point(rays)
    # brute-force oracle: dense grid around (1, 1, 1), spacing 0.01
    axis = np.linspace(0.7, 1.4, 71)
    best, best_value = None, np.inf
    for x in axis:
        for y in axis:
            for z in axis:
                value = distances_squared(rays, np.array([x, y, z]))
                if value < best_value:
                    best, best_value = np.array([x, y, z]), value
    assert np.linalg.norm(estimate - best) <= 0.01 * np.sqrt(3.0)
    # the normal matrix is 2*I here, so the solution is the componentwise mean
    assert np.allclose(estimate, [1.1, 0.9, 1.15], atol=1e-14)


def test_symmedian_exact_recovery_noise_free():
    rng = np.random.default_rng(2)
    for _ in range(100):
        n = int(rng.integers(2, 11))
        problem, true_point = tp.random_scene(n, noise=0.0, rng=rng)
        point, degenerate = tp.initial_point(problem)
        assert not degenerate
        assert np.linalg.norm(point - true_point) <= 1e-10 * (1.0 + np.linalg.norm(true_point))


def test_symmedian_is_local_minimum_of_distance_sum():
    rng = np.random.default_rng(3)
    problem, _ = tp.random_scene(4, noise=0.2, rng=rng)
    rays = [
        tp.factor_camera(c, o) for c, o in zip(problem.cameras, problem.observations)
    ]
    estimate = tp.symmedian_point(rays)
    base = distances_squared(rays, estimate)
    for offset in itertools.product((-1, 0, 1), repeat=3):
        if offset == (0, 0, 0):
            continue
        shifted = estimate + 1e-4 * np.array(offset, dtype=float)
        assert distances_squared(rays, shifted) > base


def test_rigid_motion_equivariance():
    rng = np.random.default_rng(4)
    problem, _ = tp.random_scene(5, noise=0.1, rng=rng)
    rays = [
        tp.factor_camera(c, o) for c, o in zip(problem.cameras, problem.observations)
    ]
    estimate = tp.symmedian_point(rays)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    q *= np.sign(np.linalg.det(q))
    t = rng.normal(size=3)
    moved = [tp.Ray(q @ r.anchor + t, q @ r.direction) for r in rays]
    assert np.linalg.norm(tp.symmedian_point(moved) - (q @ estimate + t)) <= 1e-10


def test_initial_point_parallel_fallback_midpoint():
    cam_a = tp.CameraMatrix([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]], "a")
    cam_b = tp.CameraMatrix([[1, 0, 0, -1], [0, 1, 0, 0], [0, 0, 1, 0]], "b")
    problem = tp.TriangulationProblem(
        (cam_a, cam_b),
        (tp.ImageObservation(0.0, 0.0, "a"), tp.ImageObservation(0.0, 0.0, "b")),
    )
    point, degenerate = tp.initial_point(problem)
    assert degenerate
    assert np.allclose(point, [0.5, 0.0, 0.0], atol=1e-15)
