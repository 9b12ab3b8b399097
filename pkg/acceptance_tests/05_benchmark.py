import numpy as np
import pytest

from reggecurv.benchmark import BenchmarkMetric, ConstantMetric, SphereMetric, benchmark_height, get_metric


@pytest.mark.parametrize("metric", [BenchmarkMetric(), SphereMetric()], ids=["benchmark", "sphere"])
def jet_matches_finite_differences_test(metric, rng):
    points = rng.uniform(0.1, 0.9, size=(6, 2))
    step = 1e-6
    jet = metric.jet(points)
    for k, e in enumerate(np.eye(2)):
        plus, minus = metric.jet(points + step * e), metric.jet(points - step * e)
        np.testing.assert_allclose(jet.d1[..., k], (plus.value - minus.value) / (2 * step), atol=1e-8)
        np.testing.assert_allclose(jet.d2[..., k], (plus.d1 - minus.d1) / (2 * step), atol=1e-7)


def benchmark_is_graph_metric_test(rng):
    points = rng.uniform(0.0, 1.0, size=(5, 2))
    step = 1e-6
    grad = np.stack(
        [(benchmark_height(points + step * e) - benchmark_height(points - step * e)) / (2 * step) for e in np.eye(2)],
        axis=-1,
    )
    expected = np.eye(2) + np.einsum("ni,nj->nij", grad, grad)
    np.testing.assert_allclose(BenchmarkMetric().value(points), expected, atol=1e-9)


def benchmark_values_test():
    metric = BenchmarkMetric()
    assert metric.gauss_curvature(np.array([0.0, 0.0])) == pytest.approx(1.0)
    assert metric.gauss_curvature(np.array([1.0, 1.0])) == pytest.approx(0.0)

    top = np.array([[0.0, 1.0], [0.5, 1.0]])
    kappa = metric.boundary_geodesic_curvature(top, np.array([-1.0, 0.0]), np.array([0.0, -1.0]))
    assert kappa[0] == pytest.approx(-2.0 / np.sqrt(13.0))
    assert kappa[1] == pytest.approx(metric.top_geodesic_curvature(0.5))

    left = np.array([[0.0, 0.25], [0.0, 0.75]])
    kappa = metric.boundary_geodesic_curvature(left, np.array([0.0, -1.0]), np.array([1.0, 0.0]))
    np.testing.assert_array_equal(kappa, 0.0)


def benchmark_corner_metric_test():
    # f has vanishing x-derivative at x = 0, so the metric is diagonal at (0, 1)
    g = BenchmarkMetric().value(np.array([[0.0, 1.0]]))[0]
    np.testing.assert_allclose(g, np.diag([1.0, 13.0 / 9.0]), atol=1e-15)


def constant_metric_test():
    metric = ConstantMetric(np.diag([2.0, 3.0]))
    points = np.zeros((4, 3, 2))
    assert metric.value(points).shape == (4, 3, 2, 2)
    np.testing.assert_array_equal(metric.gauss_curvature(points), 0.0)

    with pytest.raises(ValueError):
        ConstantMetric(np.diag([1.0, -1.0]))


def get_metric_test():
    assert isinstance(get_metric("benchmark"), BenchmarkMetric)
    with pytest.raises(ValueError):
        get_metric("torus")


def exterior_angle_test():
    flat = get_metric("flat")
    assert flat.exterior_angle([0.5, 1.0], [-1.0, 0.0], [1.0, 0.0]) == pytest.approx(np.pi)
    assert flat.exterior_angle([0.0, 1.0], [0.0, -1.0], [1.0, 0.0]) == pytest.approx(1.5 * np.pi)
    # g-orthogonal at the corner (0, 1), so the benchmark agrees with the flat value there
    assert BenchmarkMetric().exterior_angle([0.0, 1.0], [0.0, -1.0], [1.0, 0.0]) == pytest.approx(1.5 * np.pi)
    sheared = ConstantMetric(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert sheared.exterior_angle([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]) == pytest.approx(5.0 * np.pi / 3.0)
