import numpy as np
import pytest

from reggecurv.benchmark import BenchmarkMetric
from reggecurv.mesh import unit_square


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def benchmark_metric():
    return BenchmarkMetric()


@pytest.fixture
def perturbed_mesh():
    return unit_square(2, perturb=True, seed=7)
