import numpy as np
import pytest

from reggecurv.benchmark import BenchmarkMetric, PolynomialTensor, flat_metric
from reggecurv.curvature import (
    angle_deficits,
    assemble_gauss_functional,
    assemble_neumann_functional,
    assemble_weighted_mass,
    distributional_inc,
    distributional_rotrot,
    error_representation_check,
    gauss_bonnet_total,
    lift_curvature,
)
from reggecurv.errors import IndefiniteMetricError
from reggecurv.fields import AnalyticTensorField, LagrangeFunction, ReggeFunction
from reggecurv.mesh import structured_square, unit_square
from reggecurv.metric import MetricJet, inc
from reggecurv.quadrature import triangle_rule
from reggecurv.spaces import LagrangeSpace, ReggeSpace
from reggecurv.study import check_adjointness, random_lagrange, relative_gap


IDENTITY_ORDER = 40


def interpolated(metric, mesh, k):
    space = ReggeSpace(mesh, k)
    return ReggeFunction(space, space.interpolate(metric))


# Gauss curvature functional
########################################


@pytest.mark.parametrize("k", [0, 1, 2])
def flat_functional_test(k, perturbed_mesh):
    flat = flat_metric()
    metric_h = interpolated(flat, perturbed_mesh, k)
    space = LagrangeSpace(perturbed_mesh, 2)

    functional = assemble_gauss_functional(metric_h, space)
    interior = ~space.boundary_mask()
    assert np.max(np.abs(functional.values[interior])) <= 1e-12

    difference = functional - assemble_neumann_functional(flat, space)
    free = ~space.dirichlet_mask()
    assert np.max(np.abs(difference.values[free])) <= 1e-12


def lowest_order_is_angle_deficit_test(perturbed_mesh, benchmark_metric):
    metric_h = interpolated(benchmark_metric, perturbed_mesh, 0)
    functional = assemble_gauss_functional(metric_h, LagrangeSpace(perturbed_mesh, 1))

    # element and edge terms vanish for piecewise constant metrics and straight edges
    boundary = perturbed_mesh.boundary_vertex_mask
    expected = angle_deficits(metric_h) + np.pi * boundary
    np.testing.assert_allclose(functional.values, expected, atol=1e-12)


@pytest.mark.parametrize("k", [0, 1, 2, 3])
@pytest.mark.parametrize("level", [0, 1, 2, 3])
@pytest.mark.parametrize("perturb", [False, True])
def gauss_bonnet_test(k, level, perturb, benchmark_metric):
    mesh = unit_square(level, perturb=perturb, seed=level)
    metric_h = interpolated(benchmark_metric, mesh, k)
    assert gauss_bonnet_total(metric_h, order=IDENTITY_ORDER) == pytest.approx(2.0 * np.pi, abs=1e-9)


@pytest.mark.slow
@pytest.mark.parametrize("k", [0, 1, 2, 3])
@pytest.mark.parametrize("perturb", [False, True])
def gauss_bonnet_fine_test(k, perturb, benchmark_metric):
    mesh = unit_square(4, perturb=perturb, seed=4)
    metric_h = interpolated(benchmark_metric, mesh, k)
    assert gauss_bonnet_total(metric_h, order=IDENTITY_ORDER) == pytest.approx(2.0 * np.pi, abs=1e-9)


@pytest.mark.parametrize("k", [1, 2])
def functional_locality_test(k, perturbed_mesh, benchmark_metric, rng):
    mesh = perturbed_mesh
    regge = ReggeSpace(mesh, k)
    space = LagrangeSpace(mesh, 2)
    coefficients = regge.interpolate(benchmark_metric)
    before = assemble_gauss_functional(ReggeFunction(regge, coefficients), space)

    element = 13
    bubbles = regge.cell_dofs[element, 3 * regge.per_edge :]
    changed = coefficients.copy()
    changed[bubbles] += 1e-2 * mesh.h**2 * rng.uniform(-1.0, 1.0, size=len(bubbles))
    after = assemble_gauss_functional(ReggeFunction(regge, changed), space)

    difference = after.values - before.values
    outside = np.ones(space.ndofs, dtype=bool)
    outside[space.cell_dofs[element]] = False
    np.testing.assert_allclose(difference[outside], 0.0, atol=1e-13)
    assert np.max(np.abs(difference[~outside])) > 1e-8


def indefinite_metric_test():
    mesh = structured_square(1)
    space = ReggeSpace(mesh, 0)
    metric_h = ReggeFunction(space, -np.ones(space.ndofs))
    with pytest.raises(IndefiniteMetricError):
        assemble_gauss_functional(metric_h, LagrangeSpace(mesh, 1))


# Neumann data
########################################


def flat_neumann_test():
    mesh = structured_square(2)
    space = LagrangeSpace(mesh, 1)
    values = assemble_neumann_functional(flat_metric(), space).values
    x, y = mesh.vertices.T

    corners = (np.isclose(x, 0) | np.isclose(x, 1)) & (np.isclose(y, 0) | np.isclose(y, 1))
    neumann_corners = corners & ~(np.isclose(x, 1) & np.isclose(y, 0))
    sides = (np.isclose(x, 0) | np.isclose(y, 1)) & ~corners

    np.testing.assert_allclose(values[neumann_corners], 1.5 * np.pi, atol=1e-13)
    np.testing.assert_allclose(values[sides], np.pi, atol=1e-13)
    np.testing.assert_allclose(values[~(neumann_corners | sides)], 0.0, atol=1e-13)


def benchmark_neumann_test(benchmark_metric):
    mesh = structured_square(2)
    space = LagrangeSpace(mesh, 2)
    values = assemble_neumann_functional(benchmark_metric, space).values
    coords = space.node_coordinates()
    edge_nodes = np.arange(mesh.num_vertices, space.ndofs)
    x, y = coords[edge_nodes].T

    # only edge integrals reach the edge midpoints: zero on the left side, negative on top
    np.testing.assert_allclose(values[edge_nodes[np.isclose(x, 0.0)]], 0.0, atol=1e-14)
    on_top = edge_nodes[np.isclose(y, 1.0) & (x < 1.0 - 1e-12)]
    assert np.all(values[on_top] < 0.0)

    # the metric is diagonal at the corner (0, 1): a right angle
    n = 4
    corner = n * (n + 1)
    np.testing.assert_allclose(mesh.vertices[corner], [0.0, 1.0])
    corner_value = assemble_neumann_functional(benchmark_metric, LagrangeSpace(mesh, 1)).values[corner]
    assert corner_value < 1.5 * np.pi


# Mass matrix and lifting
########################################


def weighted_mass_test(perturbed_mesh, rng):
    space = LagrangeSpace(perturbed_mesh, 2)
    flat_h = interpolated(flat_metric(), perturbed_mesh, 1)
    M = assemble_weighted_mass(space, flat_h)

    ones = np.ones(space.ndofs)
    assert ones @ (M @ ones) == pytest.approx(1.0, rel=1e-12)

    x = rng.standard_normal(space.ndofs)
    assert x @ (M @ x) > 0.0

    metric_h = interpolated(BenchmarkMetric(), perturbed_mesh, 1)
    scaled = assemble_weighted_mass(space, 3.0 * metric_h)
    np.testing.assert_allclose(scaled.toarray(), 3.0 * assemble_weighted_mass(space, metric_h).toarray(), rtol=1e-12)


@pytest.mark.parametrize("k", [1, 2])
def flat_lift_test(k, perturbed_mesh):
    flat = flat_metric()
    lifted = lift_curvature(interpolated(flat, perturbed_mesh, k), flat, k, verbosity=0)
    assert np.max(np.abs(lifted.coefficients)) <= 1e-10


def lifted_curvature_approximates_test(benchmark_metric):
    errors = []
    for level in (2, 3):
        mesh = unit_square(level, perturb=True, seed=level)
        lifted = lift_curvature(interpolated(benchmark_metric, mesh, 1), benchmark_metric, 1, verbosity=0)
        coords = lifted.space.node_coordinates()
        errors.append(np.max(np.abs(lifted.coefficients - benchmark_metric.gauss_curvature(coords))))
    assert errors[1] < errors[0] < 0.5


# Distributional operators
########################################


@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("level", [1, 2])
@pytest.mark.parametrize("seed", range(25))
def adjointness_test(k, level, seed):
    mesh = unit_square(level, perturb=True, seed=seed)
    assert check_adjointness(mesh, k, np.random.default_rng(seed), order=IDENTITY_ORDER) <= 1e-10


def zero_sigma_test(perturbed_mesh, rng):
    metric_h = interpolated(BenchmarkMetric(), perturbed_mesh, 1)
    space = ReggeSpace(perturbed_mesh, 1)
    sigma = ReggeFunction(space, np.zeros(space.ndofs))
    u = random_lagrange(LagrangeSpace(perturbed_mesh, 2), rng)
    assert distributional_inc(metric_h, sigma, u) == 0.0
    assert distributional_rotrot(metric_h, u, sigma) == 0.0


def constant_u_test(perturbed_mesh, rng):
    metric_h = interpolated(BenchmarkMetric(), perturbed_mesh, 1)
    space = ReggeSpace(perturbed_mesh, 1)
    sigma = ReggeFunction(space, rng.standard_normal(space.ndofs))
    lagrange = LagrangeSpace(perturbed_mesh, 2)
    u = LagrangeFunction(lagrange, np.ones(lagrange.ndofs))
    assert distributional_rotrot(metric_h, u, sigma, order=IDENTITY_ORDER) == pytest.approx(0.0, abs=1e-11)


def flat_smooth_inc_test(perturbed_mesh, rng):
    mesh = perturbed_mesh
    flat = AnalyticTensorField(flat_metric(), mesh)
    tensor = PolynomialTensor(*[rng.uniform(-1.0, 1.0, size=(3, 3)) for _ in range(3)])
    sigma = AnalyticTensorField(tensor, mesh)
    u = random_lagrange(LagrangeSpace(mesh, 3), rng)

    rule = triangle_rule(12)
    jet = MetricJet(np.broadcast_to(np.eye(2), (mesh.num_triangles, len(rule), 2, 2)).copy())
    weights = rule.weights[None, :] * mesh.maps.det[:, None]
    expected = np.sum(inc(jet, sigma.jet(rule.points)) * u.values(rule.points) * weights)

    assert distributional_inc(flat, sigma, u, order=12) == pytest.approx(expected, rel=1e-10, abs=1e-12)


def error_representation_test(benchmark_metric, rng):
    mesh = unit_square(2, perturb=True, seed=2)
    metric_h = interpolated(benchmark_metric, mesh, 1)
    space = LagrangeSpace(mesh, 1)

    for _ in range(10):
        u = random_lagrange(space, rng)
        gaps = []
        for time_points in (4, 8, 12, 16, 20):
            lhs, rhs = error_representation_check(
                benchmark_metric, metric_h, u, order=IDENTITY_ORDER, time_points=time_points
            )
            gaps.append(relative_gap(lhs, rhs))
        assert gaps[-1] <= 1e-8
        # the t-rule error shrinks until the spatial quadrature floor is reached
        for coarse, fine in zip(gaps[:-1], gaps[1:]):
            assert fine <= coarse or fine <= 1e-9, gaps

    # linear in the test function
    twice = LagrangeFunction(space, 2.0 * u.coefficients)
    lhs2, rhs2 = error_representation_check(benchmark_metric, metric_h, twice, order=IDENTITY_ORDER)
    assert lhs2 == pytest.approx(2.0 * lhs, rel=1e-12)
    assert rhs2 == pytest.approx(2.0 * rhs, rel=1e-12)


def exact_metric_has_no_error_test(benchmark_metric, rng):
    mesh = unit_square(1, perturb=True, seed=1)
    exact = AnalyticTensorField(benchmark_metric, mesh)
    u = random_lagrange(LagrangeSpace(mesh, 2), rng)
    lhs, rhs = error_representation_check(benchmark_metric, exact, u, time_points=4)
    assert lhs == pytest.approx(0.0, abs=1e-14)
    assert rhs == pytest.approx(0.0, abs=1e-14)
