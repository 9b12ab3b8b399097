"""
Pointwise differential geometry of two-dimensional metrics.

All routines act on batched arrays: the leading axes (typically
``(elements, points)``) are arbitrary and the trailing axes carry the tensor
indices. Derivative axes follow the tensor axes,

- ``d1[..., i, j, k]`` is the derivative of component ``ij`` in direction ``k``,
- ``d2[..., i, j, k, l]`` is the second derivative in directions ``k`` and ``l``.

The Levi-Civita symbol has ``EPS[0, 1] = +1``; the tensor version is
``EPS / sqrt(det g)``.
"""

import numpy as np


EPS = np.array([[0.0, 1.0], [-1.0, 0.0]])


class TensorJet(object):
    """Value, first and second derivatives of a symmetric 2-tensor field.

    Parameters
    ----------
    value : ndarray
        Shape (..., 2, 2).
    d1 : ndarray, optional
        Shape (..., 2, 2, 2).
    d2 : ndarray, optional
        Shape (..., 2, 2, 2, 2).
    """

    def __init__(self, value, d1=None, d2=None):
        self.value = np.asarray(value, dtype=float)
        shape = self.value.shape[:-2]
        self.d1 = np.zeros(shape + (2, 2, 2)) if d1 is None else np.asarray(d1, dtype=float)
        self.d2 = np.zeros(shape + (2, 2, 2, 2)) if d2 is None else np.asarray(d2, dtype=float)

    @property
    def shape(self):
        return self.value.shape[:-2]

    def scaled(self, factor):
        return TensorJet(factor * self.value, factor * self.d1, factor * self.d2)

    def __add__(self, other):
        return TensorJet(self.value + other.value, self.d1 + other.d1, self.d2 + other.d2)

    def __sub__(self, other):
        return TensorJet(self.value - other.value, self.d1 - other.d1, self.d2 - other.d2)

    def __rmul__(self, factor):
        return self.scaled(factor)


class MetricJet(TensorJet):
    """A tensor jet known to be a Riemannian metric, with cached algebra."""

    def __init__(self, value, d1=None, d2=None):
        super().__init__(value, d1, d2)
        g = self.value
        self.det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0]
        self._inverse = None
        self._christoffel = None
        self._christoffel_d = None

    @classmethod
    def from_tensor(cls, jet):
        return cls(jet.value, jet.d1, jet.d2)

    def is_positive_definite(self):
        return (self.value[..., 0, 0] > 0.0) & (self.det > 0.0)

    @property
    def inverse(self):
        if self._inverse is None:
            g = self.value
            inv = np.empty_like(g)
            inv[..., 0, 0] = g[..., 1, 1]
            inv[..., 1, 1] = g[..., 0, 0]
            inv[..., 0, 1] = -g[..., 0, 1]
            inv[..., 1, 0] = -g[..., 1, 0]
            self._inverse = inv / self.det[..., None, None]
        return self._inverse

    @property
    def sqrt_det(self):
        return np.sqrt(self.det)

    @property
    def eps(self):
        """Levi-Civita tensor with raised indices, shape (..., 2, 2)."""
        return EPS / self.sqrt_det[..., None, None]

    @property
    def christoffel(self):
        if self._christoffel is None:
            self._christoffel = christoffel(self)
        return self._christoffel

    @property
    def christoffel_derivative(self):
        if self._christoffel_d is None:
            self._christoffel_d = christoffel_derivative(self)
        return self._christoffel_d


class ScalarJet(object):
    """Value, gradient and Hessian of a scalar field."""

    def __init__(self, value, grad=None, hess=None):
        self.value = np.asarray(value, dtype=float)
        shape = self.value.shape
        self.grad = np.zeros(shape + (2,)) if grad is None else np.asarray(grad, dtype=float)
        self.hess = np.zeros(shape + (2, 2)) if hess is None else np.asarray(hess, dtype=float)


# Christoffel symbols and curvature
########################################


def christoffel(jet):
    """Christoffel symbols of the second kind, ``G[..., i, j, k] = Gamma^i_jk``."""
    dg = jet.d1
    A = np.swapaxes(dg, -1, -2) + dg - np.einsum("...jkl->...ljk", dg)
    return 0.5 * np.einsum("...il,...ljk->...ijk", jet.inverse, A)


def christoffel_derivative(jet):
    """Derivatives of the Christoffel symbols, ``dG[..., i, j, k, m] = d_m Gamma^i_jk``."""
    dg = jet.d1
    d2g = jet.d2
    ginv = jet.inverse

    A = np.swapaxes(dg, -1, -2) + dg - np.einsum("...jkl->...ljk", dg)
    dA = np.einsum("...lkjm->...ljkm", d2g) + d2g - np.einsum("...jklm->...ljkm", d2g)
    dginv = -np.einsum("...ia,...abm,...bl->...ilm", ginv, dg, ginv)

    return 0.5 * (np.einsum("...ilm,...ljk->...ijkm", dginv, A) + np.einsum("...il,...ljkm->...ijkm", ginv, dA))


def riemann(jet):
    """Riemann tensor ``R[..., i, j, k, l]`` with R(d_i, d_j) d_k = R[i, j, k, l] d_l."""
    G = jet.christoffel
    dG = jet.christoffel_derivative
    return (
        np.einsum("...ljki->...ijkl", dG)
        - np.einsum("...likj->...ijkl", dG)
        + np.einsum("...mjk,...lim->...ijkl", G, G)
        - np.einsum("...mik,...ljm->...ijkl", G, G)
    )


def sectional_curvature(jet, X, Y):
    """R(X, Y, Y, X) / (g(X, X) g(Y, Y) - g(X, Y)^2) for vector fields X, Y."""
    g = jet.value
    R = riemann(jet)
    num = np.einsum("...ijkl,...lw,...i,...j,...k,...w->...", R, g, X, Y, Y, X)
    gxx = np.einsum("...i,...ij,...j->...", X, g, X)
    gyy = np.einsum("...i,...ij,...j->...", Y, g, Y)
    gxy = np.einsum("...i,...ij,...j->...", X, g, Y)
    return num / (gxx * gyy - gxy**2)


def gauss_curvature(jet):
    """Gauss curvature of the metric at every point of the jet."""
    g = jet.value
    G = jet.christoffel
    dG = jet.christoffel_derivative

    R = (
        dG[..., :, 1, 1, 0]
        - dG[..., :, 0, 1, 1]
        + np.einsum("...lm,...m->...l", G[..., :, 0, :], G[..., :, 1, 1])
        - np.einsum("...lm,...m->...l", G[..., :, 1, :], G[..., :, 0, 1])
    )
    return np.einsum("...l,...l->...", g[..., :, 0], R) / jet.det


# Boundary quantities
########################################


def quadratic_form(matrix, u, v=None):
    v = u if v is None else v
    return np.einsum("...i,...ij,...j->...", u, matrix, v)


class EdgeFrame(object):
    """Metric-normalized tangent and normal along a straight edge.

    Parameters
    ----------
    jet : MetricJet
        Metric evaluated at points along the edge, leading shape S.
    tangent, normal : ndarray
        Euclidean unit tangent and normal, broadcastable to S + (2,).
    """

    def __init__(self, jet, tangent, normal):
        self.jet = jet
        shape = jet.shape + (2,)
        self.tangent = np.broadcast_to(tangent, shape)
        self.normal = np.broadcast_to(normal, shape)

        self.g_tt = quadratic_form(jet.value, self.tangent)
        self.raised_normal = np.einsum("...ij,...j->...i", jet.inverse, self.normal)
        self.g_nn = np.einsum("...i,...i->...", self.normal, self.raised_normal)

        self.length_density = np.sqrt(self.g_tt)
        self.unit_tangent = self.tangent / self.length_density[..., None]
        self.unit_normal = self.raised_normal / np.sqrt(self.g_nn)[..., None]


def geodesic_curvature(jet, tangent, normal):
    """Geodesic curvature of a straight Euclidean segment measured by the metric.

    The sign is taken with respect to the metric unit normal obtained from
    the Euclidean ``normal``: kappa = g(nabla_t t, n) with t, n unit.
    """
    frame = EdgeFrame(jet, tangent, normal)
    t = frame.unit_tangent
    G = jet.christoffel

    # t is a constant direction rescaled by 1/sqrt(g_tt); its derivative along itself
    # stays parallel to t and drops out against n.
    acc = np.einsum("...ijk,...j,...k->...i", G, t, t)
    dnorm = -0.5 * np.einsum("...abj,...a,...b,...j->...", jet.d1, frame.tangent, frame.tangent, t) / frame.g_tt
    acc = acc + dnorm[..., None] * t
    return quadratic_form(jet.value, acc, frame.unit_normal)


def angle(g, u, v):
    """Angle between vectors ``u`` and ``v`` measured by the matrix ``g``."""
    c = quadratic_form(g, u, v) / np.sqrt(quadratic_form(g, u) * quadratic_form(g, v))
    return np.arccos(np.clip(c, -1.0, 1.0))


# Covariant operators
########################################


def trace_christoffel(jet):
    """Gamma^l_lq, the logarithmic derivative of sqrt(det g)."""
    return np.einsum("...llq->...q", jet.christoffel)


def _curl_inner(jet, sigma):
    # D[i, j, k] = d_j sigma_ik - Gamma^m_ji sigma_mk
    return np.einsum("...ikj->...ijk", sigma.d1) - np.einsum("...mji,...mk->...ijk", jet.christoffel, sigma.value)


def curl(jet, sigma):
    """Covariant row-wise curl of a symmetric 2-tensor, a 1-form of shape (..., 2)."""
    return np.einsum("...jk,...ijk->...i", jet.eps, _curl_inner(jet, sigma))


def inc(jet, sigma):
    """Covariant incompatibility operator ``curl curl`` of a symmetric 2-tensor.

    In the Euclidean metric this is d11 s22 + d22 s11 - 2 d12 s12.
    """
    G = jet.christoffel
    dG = jet.christoffel_derivative
    D = _curl_inner(jet, sigma)
    trG = trace_christoffel(jet)

    Q = (
        np.einsum("...ikjq->...qijk", sigma.d2)
        - np.einsum("...mjiq,...mk->...qijk", dG, sigma.value)
        - np.einsum("...mji,...mkq->...qijk", G, sigma.d1)
        - np.einsum("...q,...ijk->...qijk", trG, D)
    )
    eps = jet.eps
    return np.einsum("...qi,...jk,...qijk->...", eps, eps, Q)


def rot(jet, u):
    """Covariant rotated gradient of a scalar, a vector of shape (..., 2)."""
    return np.einsum("...iq,...q->...i", jet.eps, u.grad)


def rotrot(jet, u):
    """Covariant ``rot rot`` of a scalar, a contravariant 2-tensor of shape (..., 2, 2)."""
    eps = jet.eps
    X = rot(jet, u)
    trG = trace_christoffel(jet)
    M = (
        np.einsum("...ip,...pq->...iq", eps, u.hess)
        - np.einsum("...q,...i->...iq", trG, X)
        + np.einsum("...iqk,...k->...iq", jet.christoffel, X)
    )
    return np.einsum("...jq,...iq->...ij", eps, M)
