"""
Analytic metrics used as exact solutions and as test fixtures.

Every class exposes ``jet(points)`` for points of shape (..., 2); metrics
additionally provide Gauss curvature and the geodesic curvature of straight
boundary segments, either in closed form or derived from the jet.
"""

import numpy as np
from numpy.polynomial import polynomial as npoly

from .metric import MetricJet, TensorJet, angle, gauss_curvature, geodesic_curvature


class AnalyticTensor(object):
    """A smooth symmetric 2-tensor field given by formulas."""

    name = "tensor"

    def jet(self, points):
        raise NotImplementedError

    def value(self, points):
        return self.jet(points).value

    def __repr__(self):
        return "<{} {}>".format(self.__class__.__name__, self.name)


class PolynomialTensor(AnalyticTensor):
    """Symmetric tensor with polynomial components.

    Parameters
    ----------
    c11, c12, c22 : array_like
        2D coefficient arrays in the ``numpy.polynomial.polynomial`` convention,
        ``c[i, j]`` multiplying ``x**i * y**j``.
    """

    name = "polynomial"

    def __init__(self, c11, c12, c22):
        comps = [np.atleast_2d(np.asarray(c, dtype=float)) for c in (c11, c12, c22)]
        self.coefficients = [[comps[0], comps[1]], [comps[1], comps[2]]]

        # derivative coefficients, indexed by direction
        self._d1 = [[[npoly.polyder(c, 1, axis=k) for k in range(2)] for c in row] for row in self.coefficients]
        self._d2 = [
            [[[npoly.polyder(dc[k], 1, axis=l) for l in range(2)] for k in range(2)] for dc in row] for row in self._d1
        ]

    @property
    def degree(self):
        return max(c.shape[0] + c.shape[1] - 2 for row in self.coefficients for c in row)

    def jet(self, points):
        points = np.asarray(points, dtype=float)
        x, y = points[..., 0], points[..., 1]
        shape = x.shape

        value = np.empty(shape + (2, 2))
        d1 = np.empty(shape + (2, 2, 2))
        d2 = np.empty(shape + (2, 2, 2, 2))
        for i in range(2):
            for j in range(2):
                value[..., i, j] = npoly.polyval2d(x, y, self.coefficients[i][j])
                for k in range(2):
                    d1[..., i, j, k] = npoly.polyval2d(x, y, self._d1[i][j][k])
                    for l in range(2):
                        d2[..., i, j, k, l] = npoly.polyval2d(x, y, self._d2[i][j][k][l])
        return TensorJet(value, d1, d2)


class AnalyticMetric(AnalyticTensor):
    """A smooth Riemannian metric given by formulas."""

    name = "metric"

    def jet(self, points):
        raise NotImplementedError

    def metric_jet(self, points):
        return MetricJet.from_tensor(self.jet(points))

    def gauss_curvature(self, points):
        return gauss_curvature(self.metric_jet(points))

    def geodesic_curvature(self, points, tangent, normal):
        return geodesic_curvature(self.metric_jet(points), tangent, normal)

    def boundary_geodesic_curvature(self, points, tangent, normal):
        """Geodesic curvature of straight boundary segments.

        Subclasses override this with closed forms where they are known.
        """
        return self.geodesic_curvature(points, tangent, normal)

    def volume_density(self, points):
        return self.metric_jet(points).sqrt_det

    def exterior_angle(self, vertex, first, second):
        """2π minus the angle between the boundary tangents ``first`` and ``second`` at ``vertex``.

        Both tangents emanate from ``vertex``; the angle is measured in this metric.
        """
        vertex = np.asarray(vertex, dtype=float)
        g = self.value(vertex[None, :])[0]
        return 2.0 * np.pi - angle(g, np.asarray(first, dtype=float), np.asarray(second, dtype=float))


class ConstantMetric(AnalyticMetric):
    """A constant symmetric positive definite matrix."""

    name = "constant"

    def __init__(self, matrix=None):
        self.matrix = np.eye(2) if matrix is None else np.asarray(matrix, dtype=float)
        if not np.allclose(self.matrix, self.matrix.T):
            raise ValueError("Constant metric must be symmetric")
        if np.any(np.linalg.eigvalsh(self.matrix) <= 0.0):
            raise ValueError("Constant metric must be positive definite")

    def jet(self, points):
        shape = np.shape(points)[:-1]
        return TensorJet(np.broadcast_to(self.matrix, shape + (2, 2)).copy())

    def gauss_curvature(self, points):
        return np.zeros(np.shape(points)[:-1])

    def boundary_geodesic_curvature(self, points, tangent, normal):
        return np.zeros(np.shape(points)[:-1])


def flat_metric():
    flat = ConstantMetric()
    flat.name = "flat"
    return flat


class PolynomialMetric(AnalyticMetric):
    """A metric with polynomial components (positivity is the caller's responsibility)."""

    name = "polynomial"

    def __init__(self, c11, c12, c22):
        self.tensor = PolynomialTensor(c11, c12, c22)

    @property
    def degree(self):
        return self.tensor.degree

    def jet(self, points):
        return self.tensor.jet(points)


class SphereMetric(AnalyticMetric):
    """Round unit sphere in stereographic coordinates, g = 4 / (1 + |x|^2)^2 I.

    Gauss curvature is identically one.
    """

    name = "sphere"

    def jet(self, points):
        points = np.asarray(points, dtype=float)
        q = 1.0 + np.sum(points**2, axis=-1)
        eye = np.eye(2)

        phi = 4.0 / q**2
        dphi = -16.0 * points / q[..., None] ** 3
        d2phi = -16.0 * eye / q[..., None, None] ** 3 + 96.0 * np.einsum("...k,...l->...kl", points, points) / (
            q[..., None, None] ** 4
        )

        value = phi[..., None, None] * eye
        d1 = np.einsum("ij,...k->...ijk", eye, dphi)
        d2 = np.einsum("ij,...kl->...ijkl", eye, d2phi)
        return TensorJet(value, d1, d2)

    def gauss_curvature(self, points):
        return np.ones(np.shape(points)[:-1])


class GraphMetric(AnalyticMetric):
    """Metric induced on the graph of a height function, g = I + grad f grad f^T.

    Parameters
    ----------
    derivatives : callable
        Maps points (..., 2) to the gradient (..., 2), Hessian (..., 2, 2) and
        third derivatives (..., 2, 2, 2) of the height function.
    """

    name = "graph"

    def __init__(self, derivatives):
        self.derivatives = derivatives

    def jet(self, points):
        f1, f2, f3 = self.derivatives(np.asarray(points, dtype=float))
        value = np.eye(2) + np.einsum("...i,...j->...ij", f1, f1)
        d1 = np.einsum("...ik,...j->...ijk", f2, f1) + np.einsum("...i,...jk->...ijk", f1, f2)
        d2 = (
            np.einsum("...ikl,...j->...ijkl", f3, f1)
            + np.einsum("...ik,...jl->...ijkl", f2, f2)
            + np.einsum("...il,...jk->...ijkl", f2, f2)
            + np.einsum("...i,...jkl->...ijkl", f1, f3)
        )
        return TensorJet(value, d1, d2)


def _benchmark_height_derivatives(points):
    # f = (x^2 + y^2) / 2 - (x^4 + y^4) / 12 separates in x and y
    shape = points.shape[:-1]
    f1 = points - points**3 / 3.0
    f2 = np.zeros(shape + (2, 2))
    f3 = np.zeros(shape + (2, 2, 2))
    for i in range(2):
        f2[..., i, i] = 1.0 - points[..., i] ** 2
        f3[..., i, i, i] = -2.0 * points[..., i]
    return f1, f2, f3


def benchmark_height(points):
    """Height function f(x, y) = (x^2 + y^2) / 2 - (x^4 + y^4) / 12."""
    points = np.asarray(points, dtype=float)
    return 0.5 * np.sum(points**2, axis=-1) - np.sum(points**4, axis=-1) / 12.0


class BenchmarkMetric(GraphMetric):
    """Graph metric of f(x, y) = (x^2 + y^2) / 2 - (x^4 + y^4) / 12 on the unit square.

    Gauss curvature and the geodesic curvature of the left (x = 0) and top
    (y = 1) sides are available in closed form. The geodesic curvature uses
    the normal pointing into the square.
    """

    name = "benchmark"

    def __init__(self, tol=1e-12):
        super().__init__(_benchmark_height_derivatives)
        self.tol = tol

    @staticmethod
    def _denominator(x, y):
        return 9.0 + x**2 * (x**2 - 3.0) ** 2 + y**2 * (y**2 - 3.0) ** 2

    def gauss_curvature(self, points):
        points = np.asarray(points, dtype=float)
        x, y = points[..., 0], points[..., 1]
        return 81.0 * (1.0 - x**2) * (1.0 - y**2) / self._denominator(x, y) ** 2

    def top_geodesic_curvature(self, x):
        """Geodesic curvature of the side y = 1 with respect to the inward normal."""
        x = np.asarray(x, dtype=float)
        P = 9.0 + x**2 * (x**2 - 3.0) ** 2
        S = self._denominator(x, 1.0)
        return -54.0 * (1.0 - x**2) / (np.sqrt(S) * P**1.5)

    def boundary_geodesic_curvature(self, points, tangent, normal):
        points = np.asarray(points, dtype=float)
        x, y = points[..., 0], points[..., 1]
        kappa = np.asarray(super().boundary_geodesic_curvature(points, tangent, normal), dtype=float).copy()

        # closed forms assume the inward normal
        normal = np.broadcast_to(normal, points.shape)
        on_left = (np.abs(x) < self.tol) & (normal[..., 0] > 0.5)
        on_top = (np.abs(y - 1.0) < self.tol) & (normal[..., 1] < -0.5)

        kappa[on_left] = 0.0
        kappa[on_top] = self.top_geodesic_curvature(x[on_top])
        return kappa


METRICS = {
    "flat": flat_metric,
    "sphere": SphereMetric,
    "benchmark": BenchmarkMetric,
}


def get_metric(name):
    try:
        return METRICS[name]()
    except KeyError as error:
        raise ValueError("Unknown metric '{}'; choose from {}".format(name, sorted(METRICS))) from error
