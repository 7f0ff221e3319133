import numpy as np
import pytest

import tripoint as tp


@pytest.fixture
def benchmark_problems():
    return {name: tp.benchmark_problem(name) for name in ("sa2", "sa3", "sa4", "con")}


@pytest.fixture
def identity_camera():
    return tp.CameraMatrix(np.hstack([np.eye(3), np.zeros((3, 1))]), "ident")


def monotone(costs, rel=1e-12, abs_=1e-15):
    """Non-increasing up to one-ulp-scale accumulation slack."""
    return all(b <= a * (1.0 + rel) + abs_ for a, b in zip(costs, costs[1:]))
