import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reggecurv.benchmark import BenchmarkMetric, PolynomialMetric, PolynomialTensor, SphereMetric
from reggecurv.metric import (
    EdgeFrame,
    MetricJet,
    ScalarJet,
    TensorJet,
    angle,
    christoffel,
    curl,
    gauss_curvature,
    geodesic_curvature,
    inc,
    rot,
    rotrot,
    sectional_curvature,
)


def random_jet(rng, shape=(4,)):
    A = rng.standard_normal(shape + (2, 2))
    value = np.einsum("...ij,...kj->...ik", A, A) + np.eye(2)
    d1 = rng.standard_normal(shape + (2, 2, 2))
    d1 = d1 + np.swapaxes(d1, -3, -2)
    d2 = rng.standard_normal(shape + (2, 2, 2, 2))
    d2 = d2 + np.swapaxes(d2, -4, -3)
    d2 = d2 + np.swapaxes(d2, -2, -1)
    return MetricJet(value, d1, d2)


def random_polynomial(rng, degree, amplitude, identity=True):
    coeffs = [amplitude * rng.uniform(-1.0, 1.0, size=(degree + 1, degree + 1)) for _ in range(3)]
    if identity:
        coeffs[0][0, 0] += 1.0
        coeffs[2][0, 0] += 1.0
    return coeffs


def flat_jet(shape=(3,)):
    return MetricJet(np.broadcast_to(np.eye(2), shape + (2, 2)).copy())


# Christoffel symbols
########################################


def flat_christoffel_test():
    np.testing.assert_array_equal(christoffel(flat_jet()), 0.0)


def christoffel_example_test():
    # g = diag(1, x^2) at x = 2
    value = np.diag([1.0, 4.0])
    d1 = np.zeros((2, 2, 2))
    d1[1, 1, 0] = 4.0
    G = christoffel(MetricJet(value, d1))

    expected = np.zeros((2, 2, 2))
    expected[0, 1, 1] = -2.0
    expected[1, 0, 1] = expected[1, 1, 0] = 0.5
    np.testing.assert_allclose(G, expected, atol=1e-15)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def christoffel_symmetry_test(seed):
    G = christoffel(random_jet(np.random.default_rng(seed)))
    np.testing.assert_allclose(G, np.swapaxes(G, -1, -2), atol=1e-12)


def christoffel_derivative_test(rng):
    metric = PolynomialMetric(*random_polynomial(rng, 3, 0.1))
    x0 = np.array([0.3, 0.6])
    step = 1e-5

    dG = metric.metric_jet(x0[None]).christoffel_derivative[0]
    for m in range(2):
        shift = step * np.eye(2)[m]
        fd = (
            christoffel(metric.metric_jet((x0 + shift)[None]))[0]
            - christoffel(metric.metric_jet((x0 - shift)[None]))[0]
        ) / (2 * step)
        np.testing.assert_allclose(dG[..., m], fd, atol=1e-7)


# Gauss curvature
########################################


def flat_curvature_test():
    np.testing.assert_array_equal(gauss_curvature(flat_jet()), 0.0)


def sphere_curvature_test(rng):
    points = rng.uniform(-2.0, 2.0, size=(50, 2))
    jet = MetricJet.from_tensor(SphereMetric().jet(points))
    np.testing.assert_allclose(gauss_curvature(jet), 1.0, rtol=1e-12)


def benchmark_curvature_test(rng):
    metric = BenchmarkMetric()
    assert metric.gauss_curvature(np.array([[0.0, 0.0]]))[0] == pytest.approx(1.0)
    assert metric.gauss_curvature(np.array([[1.0, 1.0]]))[0] == pytest.approx(0.0)

    points = rng.uniform(0.0, 1.0, size=(50, 2))
    from_jet = gauss_curvature(metric.metric_jet(points))
    np.testing.assert_allclose(from_jet, metric.gauss_curvature(points), rtol=1e-12, atol=1e-14)


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def sectional_curvature_test(seed):
    rng = np.random.default_rng(seed)
    metric = PolynomialMetric(*random_polynomial(rng, 2, 0.1))
    points = rng.uniform(0.0, 1.0, size=(5, 2))
    jet = metric.metric_jet(points)
    X = rng.standard_normal((5, 2))
    Y = rng.standard_normal((5, 2))
    np.testing.assert_allclose(sectional_curvature(jet, X, Y), gauss_curvature(jet), rtol=1e-9, atol=1e-12)


# Geodesic curvature, angles, densities
########################################


def straight_edge_test():
    kappa = geodesic_curvature(flat_jet(), np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    np.testing.assert_array_equal(kappa, 0.0)


def benchmark_top_edge_test():
    metric = BenchmarkMetric()
    point = np.array([[0.0, 1.0]])
    tangent = np.array([-1.0, 0.0])
    inward = np.array([0.0, -1.0])

    kappa = geodesic_curvature(metric.metric_jet(point), tangent, inward)[0]
    assert kappa == pytest.approx(-2.0 / np.sqrt(13.0), rel=1e-12)
    assert metric.top_geodesic_curvature(0.0) == pytest.approx(-2.0 / np.sqrt(13.0), rel=1e-12)

    # independent of the direction of travel, odd in the normal
    assert geodesic_curvature(metric.metric_jet(point), -tangent, inward)[0] == pytest.approx(kappa)
    assert geodesic_curvature(metric.metric_jet(point), tangent, -inward)[0] == pytest.approx(-kappa)


def benchmark_boundary_closed_form_test():
    metric = BenchmarkMetric()
    x = np.linspace(0.0, 1.0, 11)

    top = np.stack([x, np.ones_like(x)], axis=-1)
    from_jet = geodesic_curvature(metric.metric_jet(top), np.array([-1.0, 0.0]), np.array([0.0, -1.0]))
    np.testing.assert_allclose(from_jet, metric.top_geodesic_curvature(x), rtol=1e-12, atol=1e-14)

    left = np.stack([np.zeros_like(x), x], axis=-1)
    from_jet = geodesic_curvature(metric.metric_jet(left), np.array([0.0, -1.0]), np.array([1.0, 0.0]))
    np.testing.assert_allclose(from_jet, 0.0, atol=1e-14)


def sphere_great_circle_test():
    points = np.stack([np.linspace(-1.0, 1.0, 9), np.zeros(9)], axis=-1)
    jet = MetricJet.from_tensor(SphereMetric().jet(points))
    np.testing.assert_allclose(geodesic_curvature(jet, np.array([1.0, 0.0]), np.array([0.0, 1.0])), 0.0, atol=1e-14)


def angle_test():
    eye = np.eye(2)
    assert angle(eye, np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx(np.pi / 2)
    assert angle(eye, np.array([1.0, 2.0]), np.array([1.0, 2.0])) == pytest.approx(0.0, abs=1e-7)
    g = np.diag([1.0, 4.0])
    assert angle(g, np.array([1.0, 0.0]), np.array([1.0, 1.0])) == pytest.approx(np.arccos(1.0 / np.sqrt(5.0)))


def densities_test():
    frame = EdgeFrame(flat_jet((1,)), np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    assert frame.jet.sqrt_det[0] == pytest.approx(1.0)
    assert frame.length_density[0] == pytest.approx(1.0)

    assert MetricJet(np.diag([4.0, 9.0])).sqrt_det == pytest.approx(6.0)
    assert BenchmarkMetric().volume_density(np.array([[0.0, 0.0]]))[0] == pytest.approx(1.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def edge_frame_orthonormal_test(seed):
    rng = np.random.default_rng(seed)
    jet = random_jet(rng, (6,))
    theta = rng.uniform(0.0, 2.0 * np.pi, size=6)
    tangent = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    normal = np.stack([-tangent[:, 1], tangent[:, 0]], axis=-1)

    frame = EdgeFrame(jet, tangent, normal)
    t, n = frame.unit_tangent, frame.unit_normal
    np.testing.assert_allclose(np.einsum("kij,ki,kj->k", jet.value, t, t), 1.0, atol=1e-13)
    np.testing.assert_allclose(np.einsum("kij,ki,kj->k", jet.value, n, n), 1.0, atol=1e-13)
    np.testing.assert_allclose(np.einsum("kij,ki,kj->k", jet.value, t, n), 0.0, atol=1e-13)
    # same side of the edge as the Euclidean normal
    assert np.all(np.sum(n * normal, axis=-1) > 0.0)
    np.testing.assert_allclose(frame.length_density**2, np.einsum("kij,ki,kj->k", jet.value, tangent, tangent))


# Covariant operators
########################################


def flat_rotrot_test():
    u = ScalarJet(np.zeros(3), np.zeros((3, 2)), np.broadcast_to(np.diag([2.0, 0.0]), (3, 2, 2)))
    R = rotrot(flat_jet(), u)
    np.testing.assert_allclose(R, np.broadcast_to(np.diag([0.0, 2.0]), (3, 2, 2)))


def flat_inc_test():
    # sigma_11 = y^2
    d2 = np.zeros((1, 2, 2, 2, 2))
    d2[0, 0, 0, 1, 1] = 2.0
    sigma = TensorJet(np.zeros((1, 2, 2)), None, d2)
    assert inc(flat_jet((1,)), sigma)[0] == pytest.approx(2.0)


@settings(max_examples=10, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def inc_is_curl_curl_test(seed):
    rng = np.random.default_rng(seed)
    metric = PolynomialMetric(*random_polynomial(rng, 2, 0.1))
    sigma = PolynomialTensor(*random_polynomial(rng, 3, 1.0, identity=False))
    x0 = rng.uniform(0.2, 0.8, size=2)
    step = 1e-4

    def curl_at(x):
        x = x[None]
        return curl(metric.metric_jet(x), sigma.jet(x))[0]

    jet0 = metric.metric_jet(x0[None])
    dC = np.stack([(curl_at(x0 + step * e) - curl_at(x0 - step * e)) / (2 * step) for e in np.eye(2)])
    composed = np.einsum("qi,qi->", jet0.eps[0], dC)

    assert inc(jet0, sigma.jet(x0[None]))[0] == pytest.approx(composed, rel=1e-6, abs=1e-8)


@settings(max_examples=15, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def kernel_superposition_test(seed):
    rng = np.random.default_rng(seed)
    jet = random_jet(rng, (5,))
    s1, s2 = random_jet(rng, (5,)), random_jet(rng, (5,))
    a, b = rng.uniform(-2.0, 2.0, size=2)
    combined = s1.scaled(a) + s2.scaled(b)

    np.testing.assert_allclose(inc(jet, combined), a * inc(jet, s1) + b * inc(jet, s2), rtol=1e-10, atol=1e-10)
    np.testing.assert_allclose(curl(jet, combined), a * curl(jet, s1) + b * curl(jet, s2), rtol=1e-10, atol=1e-10)

    def scalar():
        hess = rng.standard_normal((5, 2, 2))
        return ScalarJet(rng.standard_normal(5), rng.standard_normal((5, 2)), hess + np.swapaxes(hess, -1, -2))

    u1, u2 = scalar(), scalar()
    u = ScalarJet(a * u1.value + b * u2.value, a * u1.grad + b * u2.grad, a * u1.hess + b * u2.hess)
    np.testing.assert_allclose(rot(jet, u), a * rot(jet, u1) + b * rot(jet, u2), rtol=1e-10, atol=1e-10)
    np.testing.assert_allclose(rotrot(jet, u), a * rotrot(jet, u1) + b * rotrot(jet, u2), rtol=1e-10, atol=1e-10)
