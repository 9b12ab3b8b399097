import numpy as np
import pytest

from reggecurv.benchmark import ConstantMetric, PolynomialMetric
from reggecurv.fields import LagrangeFunction, ReggeFunction, evaluate_field, moment_residual
from reggecurv.mesh import structured_square, unit_square
from reggecurv.quadrature import segment_rule
from reggecurv.spaces import (
    REF_VERTICES,
    LagrangeSpace,
    ReggeSpace,
    eval_lagrange,
    eval_regge,
    reference_edge_points,
    shifted_legendre,
)


# Lagrange
########################################


@pytest.mark.parametrize("k", [1, 2, 3, 4])
@pytest.mark.parametrize("level", [0, 1, 3])
def lagrange_dimension_test(k, level):
    space = LagrangeSpace(structured_square(level), k)
    assert space.ndofs == (k * 2**level + 1) ** 2


def lagrange_nodal_test():
    space = LagrangeSpace(structured_square(0), 1)
    _, values, grads = eval_lagrange(space, 0, [[0.0, 0.0]])
    np.testing.assert_allclose(values[0], [1.0, 0.0, 0.0], atol=1e-14)
    np.testing.assert_allclose(grads[0], [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]], atol=1e-13)

    space = LagrangeSpace(unit_square(1, perturb=True, seed=1), 3)
    _, values, grads = eval_lagrange(space, 5, [[0.2, 0.1], [0.3, 0.6]])
    np.testing.assert_allclose(values.sum(axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(grads.sum(axis=1), 0.0, atol=1e-11)

    for k in (2, 3, 4):
        space = LagrangeSpace(structured_square(0), k)
        values = space.tabulate(space.local_nodes)[0]
        np.testing.assert_allclose(values, np.eye(space.num_local), atol=1e-11)

        points = np.random.default_rng(k).uniform(0.0, 0.5, size=(10, 2))
        np.testing.assert_allclose(space.tabulate(points)[0].sum(axis=1), 1.0, atol=1e-12)


def lagrange_edge_bubble_test():
    space = LagrangeSpace(structured_square(0), 2)
    midpoint = reference_edge_points(0, [0.5])
    values = space.tabulate(midpoint)[0][0]
    expected = np.zeros(6)
    expected[3] = 1.0
    np.testing.assert_allclose(values, expected, atol=1e-13)


@pytest.mark.parametrize("k", [1, 2, 3])
def lagrange_continuity_test(k, perturbed_mesh):
    space = LagrangeSpace(perturbed_mesh, k)
    u = LagrangeFunction(space, np.random.default_rng(3).standard_normal(space.ndofs))
    mesh = perturbed_mesh
    s = segment_rule(6).points

    for e in np.flatnonzero(~mesh.boundary_edge_mask):
        sides = []
        for t, i in zip(mesh.edge_triangles[e], mesh.edge_local_index[e]):
            forward = mesh.triangle_edge_signs[t, i] > 0
            points = reference_edge_points(i, s if forward else 1.0 - s)
            sides.append(u.values(points, np.array([t]))[0])
        np.testing.assert_allclose(sides[0], sides[1], atol=1e-11)


@pytest.mark.parametrize("k", [1, 2, 3])
def lagrange_interpolation_test(k, perturbed_mesh):
    space = LagrangeSpace(perturbed_mesh, k)

    def cubic(p):
        x, y = p[..., 0], p[..., 1]
        return 1.0 + x - 2.0 * y + (x * y if k >= 2 else 0.0) + (x**3 if k >= 3 else 0.0)

    u = LagrangeFunction(space, space.interpolate(cubic))
    points = np.array([[0.2, 0.3], [0.6, 0.1], [1.0 / 3.0, 1.0 / 3.0]])
    physical = perturbed_mesh.maps.to_physical(points)
    np.testing.assert_allclose(u.values(points), cubic(physical), atol=1e-12)


def lagrange_gradient_test():
    mesh = unit_square(1, perturb=True, seed=2)
    space = LagrangeSpace(mesh, 1)
    u = LagrangeFunction(space, space.interpolate(lambda p: p[..., 0]))
    jet = u.jet([[0.25, 0.25], [0.5, 0.1]])
    np.testing.assert_allclose(jet.value, mesh.maps.to_physical([[0.25, 0.25], [0.5, 0.1]])[..., 0], atol=1e-14)
    np.testing.assert_allclose(jet.grad[..., 0], 1.0, atol=1e-12)
    np.testing.assert_allclose(jet.grad[..., 1], 0.0, atol=1e-12)

    zero = LagrangeFunction(space, np.zeros(space.ndofs)).jet([[0.3, 0.3]])
    assert not np.any(zero.value) and not np.any(zero.grad) and not np.any(zero.hess)


def boundary_masks_test():
    space = LagrangeSpace(structured_square(2), 2)
    coords = space.node_coordinates()
    x, y = coords.T

    on_boundary = np.isclose(x, 0) | np.isclose(x, 1) | np.isclose(y, 0) | np.isclose(y, 1)
    np.testing.assert_array_equal(space.boundary_mask(), on_boundary)

    on_dirichlet = np.isclose(x, 1) | np.isclose(y, 0)
    np.testing.assert_array_equal(space.dirichlet_mask(), on_dirichlet)


# Regge
########################################


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def regge_dimension_test(k):
    mesh = structured_square(2)
    space = ReggeSpace(mesh, k)
    assert space.num_local == 3 * (k + 1) * (k + 2) // 2
    assert space.ndofs == mesh.num_edges * (k + 1) + mesh.num_triangles * 3 * k * (k + 1) // 2


def regge_lowest_order_test():
    space = ReggeSpace(structured_square(0), 0)
    values = space.tabulate([[0.2, 0.3]])[0][0]
    for i in range(3):
        t_hat = REF_VERTICES[(i + 2) % 3] - REF_VERTICES[(i + 1) % 3]
        tt = np.einsum("jab,a,b->j", values, t_hat, t_hat)
        np.testing.assert_allclose(tt, np.eye(3)[i], atol=1e-13)


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def regge_reference_duality_test(k):
    space = ReggeSpace(structured_square(0), k)
    rule = segment_rule(2 * k + 2)
    legendre = shifted_legendre(k, rule.points)

    for i in range(3):
        t_hat = REF_VERTICES[(i + 2) % 3] - REF_VERTICES[(i + 1) % 3]
        values = space.tabulate(reference_edge_points(i, rule.points))[0]
        tt = np.einsum("njab,a,b->nj", values, t_hat, t_hat)
        moments = np.einsum("n,nj,nm->mj", rule.weights, tt, legendre)
        expected = np.zeros_like(moments)
        for m in range(k + 1):
            expected[m, i * (k + 1) + m] = 1.0
        np.testing.assert_allclose(moments, expected, atol=1e-10)


@pytest.mark.parametrize("k", [0, 1, 2])
def regge_tt_continuity_test(k, perturbed_mesh):
    mesh = perturbed_mesh
    space = ReggeSpace(mesh, k)
    sigma = ReggeFunction(space, np.random.default_rng(5).standard_normal(space.ndofs))
    s = segment_rule(6).points

    for e in np.flatnonzero(~mesh.boundary_edge_mask):
        tangent = np.diff(mesh.vertices[mesh.edges[e]], axis=0)[0]
        sides = []
        for t, i in zip(mesh.edge_triangles[e], mesh.edge_local_index[e]):
            forward = mesh.triangle_edge_signs[t, i] > 0
            points = reference_edge_points(i, s if forward else 1.0 - s)
            values = evaluate_field(sigma, t, points).value
            sides.append(np.einsum("nab,a,b->n", values, tangent, tangent))
        np.testing.assert_allclose(sides[0], sides[1], atol=1e-10)


def regge_basis_matches_field_test(perturbed_mesh):
    space = ReggeSpace(perturbed_mesh, 2)
    coeffs = np.random.default_rng(1).standard_normal(space.ndofs)
    points = np.array([[0.1, 0.2], [0.5, 0.4]])
    dofs, values, d1, d2 = eval_regge(space, 3, points)
    jet = evaluate_field(ReggeFunction(space, coeffs), 3, points)
    np.testing.assert_allclose(np.einsum("j,njab->nab", coeffs[dofs], values), jet.value, atol=1e-12)

    # reference derivatives pushed forward with one F^-1 per tensor index and direction
    Finv = perturbed_mesh.maps.inverse[3]
    ref1 = np.einsum("j,njabk->nabk", coeffs[dofs], d1)
    ref2 = np.einsum("j,njabkl->nabkl", coeffs[dofs], d2)
    np.testing.assert_allclose(
        np.einsum("ai,nabl,bj,lk->nijk", Finv, ref1, Finv, Finv), jet.d1, rtol=1e-10, atol=1e-10
    )
    np.testing.assert_allclose(
        np.einsum("ai,nablm,bj,lk,mq->nijkq", Finv, ref2, Finv, Finv, Finv), jet.d2, rtol=1e-10, atol=1e-8
    )


def evaluate_field_second_derivatives_test(perturbed_mesh):
    c11 = [[1.0, 0.3, -0.2], [0.1, 0.4, 0.0], [0.25, 0.0, 0.0]]
    c12 = [[0.0, 0.2, 0.1], [-0.1, 0.3, 0.0], [0.05, 0.0, 0.0]]
    c22 = [[1.2, -0.1, 0.3], [0.2, 0.1, 0.0], [-0.15, 0.0, 0.0]]
    metric = PolynomialMetric(c11, c12, c22)
    space = ReggeSpace(perturbed_mesh, 2)
    field = ReggeFunction(space, space.interpolate(metric))
    points = np.array([[0.2, 0.3], [0.6, 0.1], [0.1, 0.8]])

    for element in (0, 11, perturbed_mesh.num_triangles - 1):
        jet = evaluate_field(field, element, points)
        physical = perturbed_mesh.maps.to_physical(points, np.array([element]))[0]

        # central differences of the analytic first derivatives
        step = 1e-5
        for k, e in enumerate(np.eye(2)):
            plus, minus = metric.jet(physical + step * e), metric.jet(physical - step * e)
            np.testing.assert_allclose(jet.d2[..., k], (plus.d1 - minus.d1) / (2 * step), atol=1e-8)
        np.testing.assert_allclose(jet.d2, metric.jet(physical).d2, atol=1e-10)

    zero = evaluate_field(ReggeFunction(space, np.zeros(space.ndofs)), 0, points)
    assert not np.any(zero.value) and not np.any(zero.d1) and not np.any(zero.d2)


def evaluate_lagrange_field_test():
    mesh = unit_square(1, perturb=True, seed=4)
    space = LagrangeSpace(mesh, 1)
    u = LagrangeFunction(space, space.interpolate(lambda p: p[..., 0]))
    points = np.array([[0.2, 0.3], [0.5, 0.5]])
    expected = mesh.maps.to_physical(points, np.array([2]))[0][:, 0]
    np.testing.assert_allclose(evaluate_field(u, 2, points), expected, atol=1e-14)


@pytest.mark.parametrize("k", [0, 1, 2])
def regge_reproduces_constants_test(k, perturbed_mesh):
    space = ReggeSpace(perturbed_mesh, k)
    points = np.array([[0.2, 0.2], [0.7, 0.1], [0.0, 0.5]])
    for matrix in (np.eye(2), np.diag([2.0, 3.0]), np.array([[2.0, 0.5], [0.5, 1.0]])):
        field = ReggeFunction(space, space.interpolate(ConstantMetric(matrix)))
        np.testing.assert_allclose(field.jet(points).value, np.broadcast_to(matrix, (32, 3, 2, 2)), atol=1e-12)


def regge_reproduces_polynomials_test(perturbed_mesh):
    c11 = [[1.0, 0.2, 0.1], [0.3, -0.1, 0.0], [0.05, 0.0, 0.0]]
    c12 = [[0.1, 0.0, 0.02], [0.0, 0.1, 0.0], [-0.05, 0.0, 0.0]]
    c22 = [[1.5, 0.1, 0.0], [0.2, 0.0, 0.0], [0.1, 0.0, 0.0]]
    metric = PolynomialMetric(c11, c12, c22)

    space = ReggeSpace(perturbed_mesh, 2)
    field = ReggeFunction(space, space.interpolate(metric))
    points = np.array([[0.2, 0.2], [0.7, 0.1], [0.1, 0.6]])
    jet = field.jet(points)
    exact = metric.jet(perturbed_mesh.maps.to_physical(points))
    np.testing.assert_allclose(jet.value, exact.value, atol=1e-12)
    np.testing.assert_allclose(jet.d1, exact.d1, atol=1e-10)
    np.testing.assert_allclose(jet.d2, exact.d2, atol=1e-10)


@pytest.mark.parametrize("k", [0, 1, 2, 3])
@pytest.mark.parametrize("level", [0, 2])
def interpolant_moments_test(k, level, benchmark_metric):
    mesh = unit_square(level, perturb=True, seed=level)
    space = ReggeSpace(mesh, k)
    coeffs = space.interpolate(benchmark_metric)
    assert moment_residual(space, coeffs, benchmark_metric, order=2 * k + 12) <= 1e-11


def invalid_degree_test():
    with pytest.raises(ValueError):
        LagrangeSpace(structured_square(0), 0)
    with pytest.raises(ValueError):
        ReggeSpace(structured_square(0), -1)
