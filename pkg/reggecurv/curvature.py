"""
Distributional Gauss curvature of piecewise smooth metrics and its lifting
into a Lagrange space.

For a metric g that is smooth on each triangle and tangential-tangential
continuous across edges, the densitized curvature acts on a continuous test
function u as

    sum_T int_T K u dA  +  sum_E int_E [kappa] u dl  +  sum_V Theta_V u(V)

where [kappa] collects the geodesic curvatures of an edge seen from its
neighbouring elements (inward normals) and Theta_V = 2 pi minus the sum of
the element angles at V. The same element-by-element form is used on
boundary edges and vertices, so that pairing with the constant function
returns pi * (number of boundary vertices) + 2 pi.
"""

import numpy as np

from .errors import IndefiniteMetricError
from .fields import AnalyticTensorField, LagrangeFunction
from .mesh import NEUMANN, local_edge_vertices
from .metric import (
    EdgeFrame,
    angle,
    curl,
    gauss_curvature,
    geodesic_curvature,
    inc,
    quadratic_form,
    rotrot,
)
from .quadrature import segment_rule, triangle_rule
from .solve import assemble_vector, solve_spd
from .spaces import REF_VERTICES, LagrangeSpace, reference_edge_points


DEFAULT_ANALYTIC_ORDER = 20


def default_order(metric):
    """Quadrature exactness used for integrands built from ``metric``."""
    degree = getattr(metric, "degree", None)
    return DEFAULT_ANALYTIC_ORDER if degree is None else 2 * degree + 6


def checked_metric_jet(metric, points, elements=None):
    """Metric jet at reference ``points``; raise if it is not positive definite anywhere."""
    jet = metric.metric_jet(points, elements)
    ok = jet.is_positive_definite()
    if not np.all(ok):
        t, n = np.argwhere(~ok)[0]
        element = t if elements is None else np.arange(metric.mesh.num_triangles)[elements][t]
        raise IndefiniteMetricError(element, np.atleast_2d(points)[n], jet.det[t, n])
    return jet


class Functional(object):
    """A linear functional on a Lagrange space, stored as its values on the basis."""

    def __init__(self, space, values):
        self.space = space
        self.values = np.asarray(values, dtype=float)

    def __call__(self, u):
        coefficients = u.coefficients if isinstance(u, LagrangeFunction) else np.asarray(u)
        return float(self.values @ coefficients)

    def __sub__(self, other):
        return Functional(self.space, self.values - other.values)

    def __add__(self, other):
        return Functional(self.space, self.values + other.values)

    def __repr__(self):
        return "<Functional on {}>".format(self.space)


# Curvature functionals
########################################


def vertex_angles(metric, vertex):
    """Angle of every element at local vertex ``vertex`` measured by ``metric`` there."""
    mesh = metric.mesh
    g = checked_metric_jet(metric, REF_VERTICES[vertex : vertex + 1]).value[:, 0]
    corners = mesh.vertices[mesh.triangles]
    t1 = corners[:, (vertex + 1) % 3] - corners[:, vertex]
    t2 = corners[:, (vertex + 2) % 3] - corners[:, vertex]
    return angle(g, t1, t2)


def assemble_gauss_functional(metric, space, order=None, verbosity=0):
    """Distributional densitized Gauss curvature of ``metric`` tested with the basis of ``space``.

    Parameters
    ----------
    metric : TensorField
        Piecewise smooth metric, e.g. a :class:`~reggecurv.fields.ReggeFunction`.
    space : LagrangeSpace
    order : int, optional
        Quadrature exactness on elements and edges (default 2k + 6).

    Returns
    -------
    Functional
    """
    order = default_order(metric) if order is None else order
    mesh = space.mesh
    maps = mesh.maps

    # Element terms
    rule = triangle_rule(order)
    jet = checked_metric_jet(metric, rule.points)
    weights = rule.weights[None, :] * np.abs(maps.det)[:, None]
    phi = space.tabulate(rule.points)[0]
    local = np.einsum("tq,qj->tj", gauss_curvature(jet) * jet.sqrt_det * weights, phi)

    # Edge terms, one per element side; interior edges collect the jump
    seg = segment_rule(order)
    for i in range(3):
        ref = reference_edge_points(i, seg.points)
        jet = checked_metric_jet(metric, ref)
        tangent, normal, length = mesh.local_frames(i)
        tangent = tangent[:, None, :]
        normal = normal[:, None, :]
        kappa = geodesic_curvature(jet, tangent, normal)
        density = np.sqrt(quadratic_form(jet.value, np.broadcast_to(tangent, jet.shape + (2,))))
        phi = space.tabulate(ref)[0]
        local += np.einsum("tq,qj->tj", kappa * density * length[:, None] * seg.weights, phi)

    # Angle terms; local Lagrange node j is local vertex j
    for j in range(3):
        local[:, j] -= vertex_angles(metric, j)

    values = assemble_vector(space.cell_dofs, local, space.ndofs)
    values[: mesh.num_vertices] += 2.0 * np.pi

    if verbosity >= 5:
        print("[curvature] Gauss functional on {}: total {:.6e}".format(space, values.sum()))
    return Functional(space, values)


def angle_deficits(metric):
    """Angle defect at every vertex: 2 pi (interior) or pi (boundary) minus the element angles."""
    mesh = metric.mesh
    deficits = np.where(mesh.boundary_vertex_mask, np.pi, 2.0 * np.pi)
    for j in range(3):
        np.subtract.at(deficits, mesh.triangles[:, j], vertex_angles(metric, j))
    return deficits


def gauss_bonnet_total(metric, order=None):
    """Total curvature of a metric on a disc: the functional applied to 1, corrected on the boundary.

    Equals 2 pi for every admissible metric on a simply connected mesh.
    """
    mesh = metric.mesh
    functional = assemble_gauss_functional(metric, LagrangeSpace(mesh, 1), order=order)
    return float(functional.values.sum() - np.pi * np.count_nonzero(mesh.boundary_vertex_mask))


def assemble_neumann_functional(exact_metric, space, order=DEFAULT_ANALYTIC_ORDER, labels=(NEUMANN,)):
    """Boundary contribution of an exact metric on the natural-boundary part.

    Collects the geodesic curvature of the labelled boundary edges (inward
    normal) and, at every vertex of their closure, 2 pi minus the interior
    angle enclosed by the two boundary edges.
    """
    mesh = space.mesh
    maps = mesh.maps
    seg = segment_rule(order)
    values = np.zeros(space.ndofs)

    edges = mesh.edges_with_label(*labels)
    triangles = mesh.edge_triangles[edges, 0]
    sides = mesh.edge_local_index[edges, 0]
    for i in range(3):
        tris = triangles[sides == i]
        if len(tris) == 0:
            continue
        ref = reference_edge_points(i, seg.points)
        points = maps.to_physical(ref, tris)
        tangent, normal, length = mesh.local_frames(i, tris)
        tangent = np.broadcast_to(tangent[:, None, :], points.shape)
        normal = np.broadcast_to(normal[:, None, :], points.shape)

        kappa = exact_metric.boundary_geodesic_curvature(points, tangent, normal)
        density = np.sqrt(quadratic_form(exact_metric.value(points), tangent))
        phi = space.tabulate(ref)[0]
        local = np.einsum("tq,qj->tj", kappa * density * length[:, None] * seg.weights, phi)
        values += assemble_vector(space.cell_dofs[tris], local, space.ndofs)

    for v in np.flatnonzero(mesh.vertices_with_label(*labels)):
        a, b = mesh.vertex_boundary_neighbours(v)
        x = mesh.vertices[v]
        values[v] += exact_metric.exterior_angle(x, mesh.vertices[a] - x, mesh.vertices[b] - x)

    return Functional(space, values)


def assemble_weighted_mass(space, metric, order=None):
    """Mass matrix of ``space`` weighted with the volume density of ``metric``."""
    order = max(default_order(metric), 2 * space.degree) if order is None else order
    rule = triangle_rule(order)
    jet = checked_metric_jet(metric, rule.points)
    return space.mass_matrix(density=jet.sqrt_det, rule=rule)


class LiftedCurvature(object):
    """Lagrange approximation of the Gauss curvature of a Regge metric."""

    def __init__(self, function, metric, exact_metric):
        self.function = function
        self.metric = metric
        self.exact_metric = exact_metric

    @property
    def space(self):
        return self.function.space

    @property
    def degree(self):
        return self.function.degree

    @property
    def coefficients(self):
        return self.function.coefficients

    def values(self, points, elements=None):
        return self.function.values(points, elements)


def lift_curvature(metric, exact_metric, degree, order=None, tol=1e-12, verbosity=3):
    """Lift the distributional curvature of ``metric`` into continuous Lagrange elements.

    Solves the mass system weighted by the volume form of ``metric`` with the
    Gauss functional minus the Neumann boundary data as right-hand side. On
    the Dirichlet boundary the nodal values of the exact curvature are
    imposed.

    Parameters
    ----------
    metric : TensorField
        Discrete metric, typically a :class:`~reggecurv.fields.ReggeFunction`.
    exact_metric : AnalyticMetric
        Supplies the Dirichlet values and the Neumann data.
    degree : int
        Lagrange degree of the lifted curvature.
    order : int, optional
        Quadrature exactness (default 2k + 6).
    tol : float
        Relative residual required from the linear solve.
    verbosity : int

    Returns
    -------
    LiftedCurvature
    """
    mesh = metric.mesh
    space = LagrangeSpace(mesh, degree)
    order = default_order(metric) if order is None else order

    rhs = assemble_gauss_functional(metric, space, order) - assemble_neumann_functional(exact_metric, space, order)
    mass = assemble_weighted_mass(space, metric, max(order, 2 * degree))

    mask = space.dirichlet_mask()
    boundary_values = np.zeros(space.ndofs)
    boundary_values[mask] = exact_metric.gauss_curvature(space.node_coordinates()[mask])

    coefficients = solve_spd(mass, rhs.values, mask, boundary_values, tol=tol, verbosity=verbosity)
    if verbosity >= 4:
        print("[curvature] Lifted curvature into {} ({} constrained dofs)".format(space, np.count_nonzero(mask)))

    return LiftedCurvature(LagrangeFunction(space, coefficients), metric, exact_metric)


# Distributional covariant operators
########################################


def _corners(mesh):
    return mesh.vertices[mesh.triangles]


def distributional_inc(metric, sigma, u, order=None):
    """Distributional covariant incompatibility of ``sigma`` applied to ``u``.

    Sums over elements the volume term, the edge terms built from the
    covariant curl and the tangential derivative of sigma(n, t), and the
    vertex terms sigma(n, t) with t pointing into the vertex. Here n and t
    are metric unit vectors, n pointing into the element.
    """
    order = default_order(sigma) if order is None else order
    mesh = metric.mesh
    maps = mesh.maps

    rule = triangle_rule(order)
    jet = checked_metric_jet(metric, rule.points)
    weights = rule.weights[None, :] * np.abs(maps.det)[:, None]
    total = np.sum(inc(jet, sigma.jet(rule.points)) * u.jet(rule.points).value * jet.sqrt_det * weights)

    seg = segment_rule(order)
    for i in range(3):
        ref = reference_edge_points(i, seg.points)
        jet = checked_metric_jet(metric, ref)
        s = sigma.jet(ref)
        tangent, normal, length = mesh.local_frames(i)
        tau = np.broadcast_to(tangent[:, None, :], jet.shape + (2,))
        frame = EdgeFrame(jet, tau, normal[:, None, :])

        curl_t = np.einsum("...i,...i->...", curl(jet, s), tau)

        # s_nt = sigma(w, tau) sqrt(det g) / g_tt with w = g^-1 nu, differentiated along tau
        w = frame.raised_normal
        A = quadratic_form(s.value, w, tau)
        B = jet.sqrt_det / frame.g_tt
        g_prime = np.einsum("...ijk,...k->...ij", jet.d1, tau)
        s_prime = np.einsum("...ijk,...k->...ij", s.d1, tau)
        w_prime = -np.einsum("...ia,...ab,...b->...i", jet.inverse, g_prime, w)
        A_prime = quadratic_form(s_prime, w, tau) + quadratic_form(s.value, w_prime, tau)
        B_prime = B * (
            0.5 * np.einsum("...ij,...ji->...", jet.inverse, g_prime) - quadratic_form(g_prime, tau) / frame.g_tt
        )
        d_snt = A_prime * B + A * B_prime

        integrand = u.jet(ref).value * (curl_t + d_snt)
        total -= np.sum(integrand * length[:, None] * seg.weights)

    corners = _corners(mesh)
    for j in range(3):
        vertex = REF_VERTICES[j : j + 1]
        jet = checked_metric_jet(metric, vertex)
        s = sigma.jet(vertex).value
        u_v = u.jet(vertex).value[:, 0]
        for i in ((j + 1) % 3, (j + 2) % 3):
            a, b = local_edge_vertices(i)
            other = b if a == j else a
            tangent, normal, _ = mesh.local_frames(i)
            into = corners[:, j] - corners[:, other]
            into /= np.linalg.norm(into, axis=-1)[:, None]
            frame = EdgeFrame(jet, into[:, None, :], normal[:, None, :])
            total += np.sum(u_v * quadratic_form(s, frame.unit_normal, frame.unit_tangent)[:, 0])

    return float(total)


def distributional_rotrot(metric, u, sigma, order=None):
    """Distributional covariant ``rot rot`` of ``u`` applied to ``sigma``.

    Volume term sigma : rot rot u plus, on every element side,
    sigma(t, t) times the normal derivative of u (metric unit vectors, inward
    normal).
    """
    order = default_order(sigma) if order is None else order
    mesh = metric.mesh
    maps = mesh.maps

    rule = triangle_rule(order)
    jet = checked_metric_jet(metric, rule.points)
    weights = rule.weights[None, :] * np.abs(maps.det)[:, None]
    R = rotrot(jet, u.jet(rule.points))
    total = np.sum(np.einsum("...ij,...ij->...", R, sigma.jet(rule.points).value) * jet.sqrt_det * weights)

    seg = segment_rule(order)
    for i in range(3):
        ref = reference_edge_points(i, seg.points)
        jet = checked_metric_jet(metric, ref)
        tangent, normal, length = mesh.local_frames(i)
        tau = np.broadcast_to(tangent[:, None, :], jet.shape + (2,))
        frame = EdgeFrame(jet, tau, normal[:, None, :])

        s_tt = quadratic_form(sigma.jet(ref).value, tau) / frame.g_tt
        du_n = np.einsum("...i,...i->...", u.jet(ref).grad, frame.unit_normal)
        total += np.sum(s_tt * du_n * frame.length_density * length[:, None] * seg.weights)

    return float(total)


def error_representation_check(exact_metric, metric, u, order=None, time_points=20):
    """Compare the curvature error with its integral representation.

    Returns the pair (lhs, rhs) with lhs the difference of the curvature
    functionals of ``metric`` and the exact metric applied to ``u``, and rhs
    the integral over t in [0, 1] of -1/2 times the distributional
    incompatibility of ``metric - exact`` along the straight path between
    them.
    """
    mesh = metric.mesh
    exact = AnalyticTensorField(exact_metric, mesh)
    order = default_order(metric) if order is None else order

    lhs = assemble_gauss_functional(metric, u.space, order)(u) - assemble_gauss_functional(exact, u.space, order)(u)

    sigma = metric - exact
    time = segment_rule(2 * time_points - 1)
    rhs = 0.0
    for t, w in zip(time.points, time.weights):
        rhs -= 0.5 * w * distributional_inc(exact + float(t) * sigma, sigma, u, order)
    return lhs, rhs
