"""
Numerical integration on the reference segment [0, 1] and the reference
triangle {x, y >= 0, x + y <= 1}.

Triangle rules are collapsed tensor products: a Gauss-Jacobi rule (weight
1 - s) in the collapsed direction times a Gauss-Legendre rule along the
collapsed fibre. This gives rules of any exactness without tabulated data.
"""

import functools

import numpy as np
from numpy.polynomial import legendre
from scipy import special


class QuadratureRule(object):
    """Points and positive weights with a certified polynomial exactness.

    Parameters
    ----------
    points : ndarray
        Reference coordinates, shape (n,) for segments or (n, 2) for triangles.
    weights : ndarray
        Weights, shape (n,).
    exactness_degree : int
        Highest total polynomial degree integrated exactly.
    """

    def __init__(self, points, weights, exactness_degree):
        self.points = np.asarray(points, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        self.exactness_degree = int(exactness_degree)

        self.points.setflags(write=False)
        self.weights.setflags(write=False)

    def __len__(self):
        return len(self.weights)

    def __repr__(self):
        return "<{} n={} exactness={}>".format(self.__class__.__name__, len(self), self.exactness_degree)

    def integrate(self, values):
        """Weighted sum over the last axis of ``values``."""
        return np.asarray(values) @ self.weights


def _num_points(exactness):
    if exactness < 0:
        raise ValueError("Quadrature exactness must be nonnegative, got {}".format(exactness))
    # n Gauss points are exact up to degree 2n - 1
    return int(exactness) // 2 + 1


@functools.lru_cache(maxsize=None)
def segment_rule(exactness):
    """Gauss-Legendre rule on [0, 1] exact up to degree ``exactness``."""
    n = _num_points(exactness)
    x, w = legendre.leggauss(n)
    return QuadratureRule(0.5 * (x + 1.0), 0.5 * w, 2 * n - 1)


@functools.lru_cache(maxsize=None)
def triangle_rule(exactness):
    """Collapsed Gauss-Jacobi x Gauss-Legendre rule on the unit triangle.

    The map (s, t) -> (s, t (1 - s)) has Jacobian (1 - s), which is absorbed
    into the Jacobi weight of the s-direction.
    """
    n = _num_points(exactness)

    xi, w_s = special.roots_jacobi(n, 1.0, 0.0)
    s = 0.5 * (xi + 1.0)
    w_s = 0.25 * w_s

    seg = segment_rule(exactness)
    t = seg.points
    w_t = seg.weights

    S, T = np.meshgrid(s, t, indexing="ij")
    points = np.stack([S.ravel(), (T * (1.0 - S)).ravel()], axis=-1)
    weights = np.outer(w_s, w_t).ravel()

    return QuadratureRule(points, weights, 2 * n - 1)
