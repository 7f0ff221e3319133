import numpy as np
import pytest

import tripoint as tp


def test_project_benchmark_p1_origin():
    camera = tp.benchmark_problem("sa2").cameras[0]
    u, v, depth = tp.project(camera, (0.0, 0.0, 0.0))
    assert (u, v, depth) == (0.0, 0.0, 1.0)


def test_project_identity_camera_perspective_division(identity_camera):
    u, v, depth = tp.project(identity_camera, (2.0, 4.0, 2.0))
    assert (u, v, depth) == (1.0, 2.0, 2.0)


def test_project_benchmark_p2_matches_row_evaluation():
    # oracle: evaluate the camera rows directly at the benchmark point
    camera = tp.benchmark_problem("sa2").cameras[1]
    x, y, z = -3.0 / 11.0, -2.0 / 11.0, 7.0 / 11.0
    rows = camera.matrix
    depth_expected = rows[2, 0] * x + rows[2, 1] * y + rows[2, 2] * z + rows[2, 3]
    u_expected = (rows[0, 0] * x + rows[0, 1] * y + rows[0, 2] * z + rows[0, 3]) / depth_expected
    v_expected = (rows[1, 0] * x + rows[1, 1] * y + rows[1, 2] * z + rows[1, 3]) / depth_expected
    u, v, depth = tp.project(camera, (x, y, z))
    assert u == u_expected and v == v_expected and depth == depth_expected
    # hand values: (-1/9, 1/18, 18/11)
    assert abs(u - (-1.0 / 9.0)) < 1e-15
    assert abs(v - 1.0 / 18.0) < 1e-15
    assert abs(depth - 18.0 / 11.0) < 1e-15


def test_project_depth_near_zero():
    camera = tp.CameraMatrix([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]])
    with pytest.raises(tp.DepthNearZero):
        tp.project(camera, (1.0, 1.0, 0.0))


def test_project_negative_depth_is_fine(identity_camera):
    u, v, depth = tp.project(identity_camera, (2.0, 4.0, -2.0))
    assert depth == -2.0 and u == -1.0 and v == -2.0


def test_evaluate_residual_sa2_reference_cost(benchmark_problems):
    point = (-0.272727272727273, -0.181818181818182, 0.636363636363636)
    result = tp.evaluate_residual(benchmark_problems["sa2"], point)
    assert abs(result.cost - 0.055555555555556) <= 1e-12
    assert result.residuals.shape == (4,)
    assert result.depths.shape == (2,)


def test_evaluate_residual_con_reference_cost(benchmark_problems):
    point = (1.424098078272550, -1.238341159147880, 0.115482211291935)
    result = tp.evaluate_residual(benchmark_problems["con"], point)
    assert abs(result.cost - 1.223123745015136) <= 1e-12


def exact_problem():
    """Two integer cameras observing an integer point with exact projections."""
    cam1 = tp.CameraMatrix([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]], "a")
    cam2 = tp.CameraMatrix([[0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 2]], "b")
    point = np.array([1.0, 2.0, 4.0])
    observations = []
    for cam in (cam1, cam2):
        u, v, _ = tp.project(cam, point)
        observations.append(tp.ImageObservation(u, v, cam.label))
    return tp.TriangulationProblem((cam1, cam2), tuple(observations)), point


def test_evaluate_residual_exact_zero():
    problem, point = exact_problem()
    result = tp.evaluate_residual(problem, point)
    assert np.all(result.residuals == 0.0)
    assert result.cost == 0.0


def test_evaluate_residual_depth_error_carries_camera_index(identity_camera):
    shifted = tp.CameraMatrix([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 5]], "far")
    problem = tp.TriangulationProblem(
        (shifted, identity_camera),
        (tp.ImageObservation(0, 0, "far"), tp.ImageObservation(0, 0, "ident")),
    )
    with pytest.raises(tp.DepthNearZero) as err:
        tp.evaluate_residual(problem, (0.5, 0.5, 0.0))
    assert err.value.camera_index == 1


def test_residual_cost_is_sum_of_squares():
    rng = np.random.default_rng(0)
    problem, _ = tp.random_scene(4, noise=0.05, rng=rng)
    result = tp.evaluate_residual(problem, rng.normal(size=3) * 0.2)
    assert result.cost == float(result.residuals @ result.residuals)
    assert result.cost >= 0.0


def test_residual_matches_per_camera_projection():
    rng = np.random.default_rng(1)
    problem, _ = tp.random_scene(5, noise=0.1, rng=rng)
    point = rng.normal(size=3) * 0.3
    result = tp.evaluate_residual(problem, point)
    for i, (camera, obs) in enumerate(zip(problem.cameras, problem.observations)):
        u_hat, v_hat, depth = tp.project(camera, point)
        assert result.residuals[2 * i] == u_hat - obs.u
        assert result.residuals[2 * i + 1] == v_hat - obs.v
        assert result.depths[i] == depth


def test_permutation_equivariance():
    rng = np.random.default_rng(2)
    problem, _ = tp.random_scene(6, noise=0.05, rng=rng)
    point = rng.normal(size=3) * 0.2
    base = tp.evaluate_residual(problem, point)
    perm = rng.permutation(6)
    shuffled = tp.TriangulationProblem(
        tuple(problem.cameras[i] for i in perm),
        tuple(problem.observations[i] for i in perm),
    )
    other = tp.evaluate_residual(shuffled, point)
    pairs = base.residuals.reshape(-1, 2)
    assert np.array_equal(other.residuals.reshape(-1, 2), pairs[perm])
    assert other.cost == pytest.approx(base.cost, rel=1e-15)


@pytest.mark.parametrize("scale", [2.0, -1.0, 1e-3])
def test_projection_scale_invariance(scale):
    rng = np.random.default_rng(3)
    problem, _ = tp.random_scene(3, rng=rng)
    point = rng.normal(size=3) * 0.2
    for camera in problem.cameras:
        u, v, depth = tp.project(camera, point)
        scaled = tp.CameraMatrix(scale * camera.matrix, camera.label)
        u2, v2, depth2 = tp.project(scaled, point)
        assert u2 == pytest.approx(u, rel=1e-14, abs=1e-14)
        assert v2 == pytest.approx(v, rel=1e-14, abs=1e-14)
        assert depth2 == pytest.approx(scale * depth, rel=1e-14)


def test_problem_validation():
    camera = tp.CameraMatrix(np.hstack([np.eye(3), np.zeros((3, 1))]))
    obs = tp.ImageObservation(0.0, 0.0)
    with pytest.raises(ValueError):
        tp.TriangulationProblem((camera,), (obs,))
    with pytest.raises(ValueError):
        tp.TriangulationProblem((camera, camera), (obs,))
    with pytest.raises(ValueError):
        tp.CameraMatrix(np.full((3, 4), np.nan))
    with pytest.raises(ValueError):
        tp.CameraMatrix(np.eye(3))
    with pytest.raises(ValueError):
        tp.ImageObservation(np.inf, 0.0)


def test_evaluate_residual_rejects_nonfinite_point():
    problem = tp.benchmark_problem("sa2")
    with pytest.raises(ValueError):
        tp.evaluate_residual(problem, (np.nan, 0.0, 0.0))


def test_homogeneous_lift():
    assert np.array_equal(tp.homogeneous((1.0, 2.0, 3.0)), [1.0, 2.0, 3.0, 1.0])
