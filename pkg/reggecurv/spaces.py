"""
Finite element spaces on triangle meshes.

- :class:`LagrangeSpace`: continuous piecewise polynomials of degree k >= 1.
- :class:`ReggeSpace`: piecewise polynomial symmetric matrices of degree k >= 0
  with tangential-tangential continuity across edges.

Reference basis functions are obtained by inverting the matrix of degrees of
freedom applied to a monomial basis, so both spaces work for any degree.
"""

import functools

import numpy as np
from numpy.polynomial import legendre

from .errors import SingularMomentSystemError
from .mesh import DIRICHLET, NEUMANN, local_edge_vertices
from .quadrature import segment_rule, triangle_rule
from .solve import assemble_matrix, assemble_vector


REF_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
SYM_BASIS = np.array([[[1.0, 0.0], [0.0, 0.0]], [[0.0, 1.0], [1.0, 0.0]], [[0.0, 0.0], [0.0, 1.0]]])
_CENTER = np.array([1.0, 1.0]) / 3.0

# Largest acceptable condition number of a local moment matrix
MAX_CONDITION = 1e13


def reference_edge_points(i, s):
    """Points at parameters ``s`` along local edge ``i`` of the reference triangle."""
    a, b = local_edge_vertices(i)
    s = np.asarray(s, dtype=float)
    return REF_VERTICES[a] + s[:, None] * (REF_VERTICES[b] - REF_VERTICES[a])


def shifted_legendre(degree, s):
    """Legendre polynomials on [0, 1] up to ``degree``, shape (len(s), degree + 1)."""
    return legendre.legvander(2.0 * np.asarray(s, dtype=float) - 1.0, degree)


@functools.lru_cache(maxsize=None)
def monomial_exponents(degree):
    return tuple((total - j, j) for total in range(degree + 1) for j in range(total + 1))


def _power(x, n):
    return x**n if n >= 0 else np.zeros_like(x)


def monomial_jet(degree, points):
    """Monomials (centred at the reference barycentre) up to ``degree``.

    Returns
    -------
    value : ndarray (m, n)
    grad : ndarray (m, n, 2)
    hess : ndarray (m, n, 2, 2)
    """
    points = np.asarray(points, dtype=float) - _CENTER
    x, y = points[:, 0], points[:, 1]
    exps = monomial_exponents(degree)

    value = np.empty((len(exps), len(x)))
    grad = np.empty((len(exps), len(x), 2))
    hess = np.empty((len(exps), len(x), 2, 2))
    for m, (a, b) in enumerate(exps):
        value[m] = _power(x, a) * _power(y, b)
        grad[m, :, 0] = a * _power(x, a - 1) * _power(y, b)
        grad[m, :, 1] = b * _power(x, a) * _power(y, b - 1)
        hess[m, :, 0, 0] = a * (a - 1) * _power(x, a - 2) * _power(y, b)
        hess[m, :, 0, 1] = a * b * _power(x, a - 1) * _power(y, b - 1)
        hess[m, :, 1, 0] = hess[m, :, 0, 1]
        hess[m, :, 1, 1] = b * (b - 1) * _power(x, a) * _power(y, b - 2)
    return value, grad, hess


def _invert_moments(matrix, what):
    condition = np.linalg.cond(matrix)
    if not np.isfinite(condition) or condition > MAX_CONDITION:
        raise SingularMomentSystemError(
            "Moment matrix of the {} has condition number {:.3e}".format(what, condition)
        )
    return np.linalg.inv(matrix)


class LagrangeSpace(object):
    """Continuous Lagrange elements of degree ``degree`` on ``mesh``.

    Global numbering: vertex dofs first (vertex index), then ``degree - 1``
    dofs per edge ordered along the global edge orientation, then interior
    dofs element by element.
    """

    def __init__(self, mesh, degree):
        degree = int(degree)
        if degree < 1:
            raise ValueError("Lagrange degree must be at least 1, got {}".format(degree))
        self.mesh = mesh
        self.degree = degree

        self.local_nodes = self._reference_nodes(degree)
        vandermonde = monomial_jet(degree, self.local_nodes)[0].T
        self._coefficients = _invert_moments(vandermonde, "Lagrange P{} element".format(degree))

        self._build_dofs()

    def __repr__(self):
        return "<LagrangeSpace P{} ndofs={}>".format(self.degree, self.ndofs)

    @staticmethod
    def _reference_nodes(k):
        nodes = [REF_VERTICES[0], REF_VERTICES[1], REF_VERTICES[2]]
        for i in range(3):
            nodes.extend(reference_edge_points(i, np.arange(1, k) / k))
        for j in range(1, k):
            for i in range(1, k - j):
                nodes.append(np.array([i / k, j / k]))
        return np.array(nodes).reshape(-1, 2)

    @property
    def num_local(self):
        return len(self.local_nodes)

    def _build_dofs(self):
        mesh = self.mesh
        k = self.degree
        per_edge = k - 1
        per_cell = (k - 1) * (k - 2) // 2

        cell_dofs = np.empty((mesh.num_triangles, self.num_local), dtype=np.int64)
        cell_dofs[:, :3] = mesh.triangles

        offset = mesh.num_vertices
        for i in range(3):
            edges = mesh.triangle_edges[:, i]
            forward = mesh.triangle_edge_signs[:, i] > 0
            for m in range(per_edge):
                along = np.where(forward, m, per_edge - 1 - m)
                cell_dofs[:, 3 + i * per_edge + m] = offset + edges * per_edge + along

        offset += mesh.num_edges * per_edge
        first = 3 + 3 * per_edge
        for j in range(per_cell):
            cell_dofs[:, first + j] = offset + np.arange(mesh.num_triangles) * per_cell + j

        self.cell_dofs = cell_dofs
        self.ndofs = offset + mesh.num_triangles * per_cell

    # Reference basis
    ########################################

    def tabulate(self, points):
        """Reference basis values (n, nloc), gradients (n, nloc, 2) and Hessians (n, nloc, 2, 2)."""
        value, grad, hess = monomial_jet(self.degree, points)
        C = self._coefficients
        return (
            np.einsum("mj,mn->nj", C, value),
            np.einsum("mj,mnk->njk", C, grad),
            np.einsum("mj,mnkl->njkl", C, hess),
        )

    def basis(self, element, points):
        """Basis values and reference gradients on one element.

        Returns the global dof indices, values (n, nloc) and gradients (n, nloc, 2)
        with respect to the reference coordinates. Physical gradients are
        ``grad @ F^-1`` with ``F`` the Jacobian of the element map.
        """
        value, grad, _ = self.tabulate(np.atleast_2d(points))
        return self.cell_dofs[element], value, grad

    # Global data
    ########################################

    def node_coordinates(self):
        coords = np.empty((self.ndofs, 2))
        coords[self.cell_dofs] = self.mesh.maps.to_physical(self.local_nodes)
        return coords

    def interpolate(self, function):
        """Nodal interpolant of ``function``, which maps points (n, 2) to values (n,)."""
        return np.asarray(function(self.node_coordinates()), dtype=float)

    def boundary_mask(self, labels=None):
        """Dofs on the closure of the boundary part carrying ``labels`` (default all)."""
        mesh = self.mesh
        if labels is None:
            labels = (DIRICHLET, NEUMANN)
        edges = mesh.edges_with_label(*labels)

        mask = np.zeros(self.ndofs, dtype=bool)
        mask[mesh.edges[edges].ravel()] = True
        per_edge = self.degree - 1
        if per_edge > 0:
            edge_dofs = mesh.num_vertices + edges[:, None] * per_edge + np.arange(per_edge)
            mask[edge_dofs.ravel()] = True
        return mask

    def dirichlet_mask(self):
        return self.boundary_mask((DIRICHLET,))

    # Assembly
    ########################################

    def default_rule(self, extra=0):
        return triangle_rule(2 * self.degree + extra)

    def mass_matrix(self, density=None, rule=None):
        """Mass matrix, optionally weighted by ``density`` given at the points of ``rule`` (T, n)."""
        rule = self.default_rule() if rule is None else rule
        phi = self.tabulate(rule.points)[0]
        weights = rule.weights[None, :] * np.abs(self.mesh.maps.det)[:, None]
        if density is not None:
            weights = weights * density
        local = np.einsum("tq,qi,qj->tij", weights, phi, phi)
        return assemble_matrix(self.cell_dofs, local, self.ndofs)

    def stiffness_matrix(self, rule=None):
        """Euclidean Laplace stiffness matrix."""
        rule = self.default_rule() if rule is None else rule
        grad = self.tabulate(rule.points)[1]
        maps = self.mesh.maps
        phys = np.einsum("qil,tlk->tqik", grad, maps.inverse)
        weights = rule.weights[None, :] * np.abs(maps.det)[:, None]
        local = np.einsum("tq,tqik,tqjk->tij", weights, phys, phys)
        return assemble_matrix(self.cell_dofs, local, self.ndofs)

    def load_vector(self, values, rule):
        """Vector of integrals of ``values`` (T, n) times each basis function."""
        phi = self.tabulate(rule.points)[0]
        weights = rule.weights[None, :] * np.abs(self.mesh.maps.det)[:, None]
        local = np.einsum("tq,qi->ti", weights * values, phi)
        return assemble_vector(self.cell_dofs, local, self.ndofs)


class ReggeSpace(object):
    """Regge elements of degree ``degree`` on ``mesh``.

    Degrees of freedom are, for every edge e with global direction vector
    t_e, the moments of t_e^T sigma t_e against shifted Legendre polynomials
    of degree <= k along e, and for every element the moments of the pulled
    back field against symmetric matrices with polynomial entries of degree
    <= k - 1 on the reference triangle. Global edge dof ``(e, m)`` has index
    ``e * (k + 1) + m``; interior dofs follow, element by element.
    """

    def __init__(self, mesh, degree):
        degree = int(degree)
        if degree < 0:
            raise ValueError("Regge degree must be nonnegative, got {}".format(degree))
        self.mesh = mesh
        self.degree = degree

        self._coefficients = _invert_moments(self._moment_matrix(degree), "Regge R{} element".format(degree))
        self._build_dofs()

    def __repr__(self):
        return "<ReggeSpace R{} ndofs={}>".format(self.degree, self.ndofs)

    @property
    def per_edge(self):
        return self.degree + 1

    @property
    def per_cell(self):
        return 3 * self.degree * (self.degree + 1) // 2

    @property
    def num_local(self):
        return 3 * self.per_edge + self.per_cell

    @staticmethod
    def _polynomial_jet(degree, points):
        value, grad, hess = monomial_jet(degree, points)
        return (
            np.einsum("mn,cij->mcnij", value, SYM_BASIS).reshape((-1, len(value[0]), 2, 2)),
            np.einsum("mnk,cij->mcnijk", grad, SYM_BASIS).reshape((-1, len(value[0]), 2, 2, 2)),
            np.einsum("mnkl,cij->mcnijkl", hess, SYM_BASIS).reshape((-1, len(value[0]), 2, 2, 2, 2)),
        )

    @classmethod
    def _moment_matrix(cls, k):
        seg = segment_rule(2 * k + 2)
        legendre_values = shifted_legendre(k, seg.points)

        rows = []
        for i in range(3):
            a, b = local_edge_vertices(i)
            t_hat = REF_VERTICES[b] - REF_VERTICES[a]
            value = cls._polynomial_jet(k, reference_edge_points(i, seg.points))[0]
            tt = np.einsum("pnij,i,j->pn", value, t_hat, t_hat)
            rows.append(np.einsum("n,pn,nm->mp", seg.weights, tt, legendre_values))

        if k > 0:
            tri = triangle_rule(2 * k + 2)
            value = cls._polynomial_jet(k, tri.points)[0]
            tests = cls._polynomial_jet(k - 1, tri.points)[0]
            rows.append(np.einsum("n,pnij,rnij->rp", tri.weights, value, tests))

        return np.concatenate(rows, axis=0)

    def _build_dofs(self):
        mesh = self.mesh
        per_edge = self.per_edge

        cell_dofs = np.empty((mesh.num_triangles, self.num_local), dtype=np.int64)
        cell_signs = np.ones((mesh.num_triangles, self.num_local))

        for i in range(3):
            edges = mesh.triangle_edges[:, i]
            forward = mesh.triangle_edge_signs[:, i] > 0
            for m in range(per_edge):
                cell_dofs[:, i * per_edge + m] = edges * per_edge + m
                # reversing the edge maps the Legendre polynomial of degree m to (-1)^m times itself
                cell_signs[:, i * per_edge + m] = np.where(forward, 1.0, (-1.0) ** m)

        offset = mesh.num_edges * per_edge
        for j in range(self.per_cell):
            cell_dofs[:, 3 * per_edge + j] = offset + np.arange(mesh.num_triangles) * self.per_cell + j

        self.cell_dofs = cell_dofs
        self.cell_signs = cell_signs
        self.ndofs = offset + mesh.num_triangles * self.per_cell

    # Reference basis
    ########################################

    def tabulate(self, points):
        """Reference basis values (n, nloc, 2, 2) with first and second derivatives."""
        value, d1, d2 = self._polynomial_jet(self.degree, np.atleast_2d(points))
        C = self._coefficients
        return (
            np.einsum("pj,pn...->nj...", C, value),
            np.einsum("pj,pn...->nj...", C, d1),
            np.einsum("pj,pn...->nj...", C, d2),
        )

    def basis(self, element, points):
        """Signed basis functions on one element.

        Returns
        -------
        dofs : ndarray
            Global dof indices (nloc,).
        values : ndarray
            Physical values (n, nloc, 2, 2), so that the field equals
            ``sum_j coeffs[dofs[j]] * values[:, j]``.
        d1, d2 : ndarray
            First (n, nloc, 2, 2, 2) and second (n, nloc, 2, 2, 2, 2) derivatives
            of the reference components in the reference coordinates. The
            physical field is ``F^-T s F^-1`` of the reference one, so each
            derivative picks up one more ``F^-1`` per direction.
        """
        value, d1, d2 = self.tabulate(points)
        signs = self.cell_signs[element]
        Finv = self.mesh.maps.inverse[element]
        phys = np.einsum("ai,njab,bk->njik", Finv, value, Finv)
        return (
            self.cell_dofs[element],
            phys * signs[None, :, None, None],
            d1 * signs[None, :, None, None, None],
            d2 * signs[None, :, None, None, None, None],
        )

    # Interpolation
    ########################################

    def default_order(self):
        return 2 * self.degree + 6

    def edge_moments(self, tensor_values, rule):
        """Global edge dofs from tensor values (E, n, 2, 2) at the points of ``rule`` on each edge."""
        mesh = self.mesh
        direction = mesh.vertices[mesh.edges[:, 1]] - mesh.vertices[mesh.edges[:, 0]]
        tt = np.einsum("enij,ei,ej->en", tensor_values, direction, direction)
        moments = np.einsum("n,en,nm->em", rule.weights, tt, shifted_legendre(self.degree, rule.points))
        return moments.ravel()

    def edge_points(self, rule):
        mesh = self.mesh
        start = mesh.vertices[mesh.edges[:, 0]]
        end = mesh.vertices[mesh.edges[:, 1]]
        return start[:, None, :] + rule.points[None, :, None] * (end - start)[:, None, :]

    def cell_moments(self, tensor_values, rule):
        """Interior dofs from physical tensor values (T, n, 2, 2) at the points of ``rule``."""
        if self.degree == 0:
            return np.zeros(0)
        F = self.mesh.maps.F
        pulled = np.einsum("tai,tnab,tbj->tnij", F, tensor_values, F)
        tests = self._polynomial_jet(self.degree - 1, rule.points)[0]
        return np.einsum("n,tnij,rnij->tr", rule.weights, pulled, tests).ravel()

    def interpolate(self, tensor, order=None):
        """Canonical interpolant of an analytic tensor field (anything with ``value(points)``)."""
        order = self.default_order() if order is None else order
        seg = segment_rule(order)
        tri = triangle_rule(order)

        edge_values = tensor.value(self.edge_points(seg))
        cell_values = tensor.value(self.mesh.maps.to_physical(tri.points))
        return np.concatenate([self.edge_moments(edge_values, seg), self.cell_moments(cell_values, tri)])


def eval_lagrange(space, element, points):
    """Lagrange dofs, basis values and reference gradients on ``element`` at reference ``points``."""
    return space.basis(element, points)


def eval_regge(space, element, points):
    """Regge dofs, signed physical values and reference derivatives on ``element`` at reference ``points``."""
    return space.basis(element, points)
