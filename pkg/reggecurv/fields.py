"""
Fields on a mesh that can be evaluated element by element.

Each field provides ``jet(points, elements=None)`` returning its value and
physical derivatives at reference ``points`` (n, 2) of the selected
elements, with leading shape (T, n). Tensor fields return a
:class:`~reggecurv.metric.TensorJet`, scalar fields a
:class:`~reggecurv.metric.ScalarJet`.
"""

import numpy as np

from .metric import MetricJet, ScalarJet, TensorJet
from .quadrature import segment_rule, triangle_rule
from .spaces import reference_edge_points


def _select(elements):
    return slice(None) if elements is None else elements


class TensorField(object):
    """Base class of piecewise smooth symmetric tensor fields."""

    degree = None
    __array_ufunc__ = None

    def __init__(self, mesh):
        self.mesh = mesh

    def jet(self, points, elements=None):
        raise NotImplementedError

    def metric_jet(self, points, elements=None):
        return MetricJet.from_tensor(self.jet(points, elements))

    def __add__(self, other):
        return CombinedTensorField([(1.0, self), (1.0, other)])

    def __sub__(self, other):
        return CombinedTensorField([(1.0, self), (-1.0, other)])

    def __rmul__(self, factor):
        return CombinedTensorField([(float(factor), self)])


class CombinedTensorField(TensorField):
    """Linear combination sum_i c_i * field_i."""

    def __init__(self, terms):
        terms = list(terms)
        super().__init__(terms[0][1].mesh)
        self.terms = terms
        degrees = [field.degree for _, field in terms]
        self.degree = None if None in degrees else max(degrees)

    def jet(self, points, elements=None):
        result = None
        for factor, field in self.terms:
            part = field.jet(points, elements).scaled(factor)
            result = part if result is None else result + part
        return result


class ReggeFunction(TensorField):
    """A Regge finite element function, given by its global coefficient vector."""

    def __init__(self, space, coefficients):
        super().__init__(space.mesh)
        self.space = space
        self.degree = space.degree
        self.coefficients = np.asarray(coefficients, dtype=float)
        if self.coefficients.shape != (space.ndofs,):
            raise ValueError(
                "Expected {} Regge coefficients, got shape {}".format(space.ndofs, self.coefficients.shape)
            )

    def local_coefficients(self, elements=None):
        sel = _select(elements)
        return self.coefficients[self.space.cell_dofs[sel]] * self.space.cell_signs[sel]

    def jet(self, points, elements=None):
        points = np.atleast_2d(points)
        value, d1, d2 = self.space.tabulate(points)
        local = self.local_coefficients(elements)
        Finv = self.mesh.maps.inverse[_select(elements)]

        # reference field, then covariant pullback F^-T s F^-1 with chain rule for derivatives
        s0 = np.einsum("tj,nj...->tn...", local, value)
        s1 = np.einsum("tj,nj...->tn...", local, d1)
        s2 = np.einsum("tj,nj...->tn...", local, d2)
        return TensorJet(
            np.einsum("tai,tnab,tbj->tnij", Finv, s0, Finv, optimize=True),
            np.einsum("tai,tnabl,tbj,tlk->tnijk", Finv, s1, Finv, Finv, optimize=True),
            np.einsum("tai,tnablm,tbj,tlk,tmq->tnijkq", Finv, s2, Finv, Finv, Finv, optimize=True),
        )


class AnalyticTensorField(TensorField):
    """An analytic tensor (or metric) restricted to the elements of a mesh."""

    def __init__(self, tensor, mesh):
        super().__init__(mesh)
        self.tensor = tensor

    def jet(self, points, elements=None):
        return self.tensor.jet(self.mesh.maps.to_physical(np.atleast_2d(points), _select(elements)))


class LagrangeFunction(object):
    """A continuous Lagrange finite element function."""

    def __init__(self, space, coefficients):
        self.space = space
        self.mesh = space.mesh
        self.degree = space.degree
        self.coefficients = np.asarray(coefficients, dtype=float)
        if self.coefficients.shape != (space.ndofs,):
            raise ValueError(
                "Expected {} Lagrange coefficients, got shape {}".format(space.ndofs, self.coefficients.shape)
            )

    def jet(self, points, elements=None):
        points = np.atleast_2d(points)
        value, grad, hess = self.space.tabulate(points)
        sel = _select(elements)
        local = self.coefficients[self.space.cell_dofs[sel]]
        Finv = self.mesh.maps.inverse[sel]
        return ScalarJet(
            np.einsum("tj,nj->tn", local, value),
            np.einsum("tj,njl,tlk->tnk", local, grad, Finv, optimize=True),
            np.einsum("tj,njlm,tlk,tmq->tnkq", local, hess, Finv, Finv, optimize=True),
        )

    def values(self, points, elements=None):
        value = self.space.tabulate(np.atleast_2d(points))[0]
        local = self.coefficients[self.space.cell_dofs[_select(elements)]]
        return np.einsum("tj,nj->tn", local, value)


def evaluate_field(field, element, points):
    """Evaluate ``field`` on a single element at reference ``points`` (n, 2).

    Scalar (Lagrange) fields give their values (n,). Tensor fields give a
    :class:`~reggecurv.metric.TensorJet` with value (n, 2, 2) and physical
    first and second derivatives.
    """
    jet = field.jet(points, elements=np.array([element]))
    if isinstance(jet, ScalarJet):
        return jet.value[0]
    return TensorJet(jet.value[0], jet.d1[0], jet.d2[0])


def moment_residual(space, coefficients, tensor, order=None):
    """Largest difference between the dofs of a Regge function and those of an analytic tensor.

    Both sides are integrated with the same rule, so for an interpolant the
    residual measures how well the basis reproduces its own dofs.
    """
    order = space.default_order() if order is None else order
    field = ReggeFunction(space, coefficients)
    mesh = space.mesh
    seg = segment_rule(order)
    tri = triangle_rule(order)

    # evaluate the discrete field on each edge from its first neighbouring element
    t = mesh.edge_triangles[:, 0]
    i = mesh.edge_local_index[:, 0]
    edge_values = np.empty((mesh.num_edges, len(seg), 2, 2))
    for local in range(3):
        selected = np.flatnonzero(i == local)
        if len(selected) == 0:
            continue
        s = seg.points
        # element edges run a -> b; flip where this disagrees with the global orientation
        forward = mesh.triangle_edge_signs[t[selected], local] > 0
        values_fwd = field.jet(reference_edge_points(local, s), t[selected]).value
        values_bwd = field.jet(reference_edge_points(local, 1.0 - s), t[selected]).value
        edge_values[selected] = np.where(forward[:, None, None, None], values_fwd, values_bwd)

    discrete = np.concatenate(
        [
            space.edge_moments(edge_values, seg),
            space.cell_moments(field.jet(tri.points).value, tri),
        ]
    )
    exact = space.interpolate(tensor, order=order)
    return float(np.max(np.abs(discrete - exact)))
