"""
Error norms for curvature approximations and experimental orders of convergence.
"""

from dataclasses import asdict, dataclass

import lmfit
import numpy as np

from .curvature import checked_metric_jet
from .fields import AnalyticTensorField
from .quadrature import triangle_rule
from .solve import solve_spd
from .spaces import LagrangeSpace


DEFAULT_ORDER = 20


class CurvatureError(object):
    """Elementwise difference between a lifted curvature and the exact one.

    Parameters
    ----------
    lifted : LiftedCurvature
    densitized : bool
        Compare K_h * sqrt(det g_h) with K * sqrt(det g) instead of K_h with K.
    """

    def __init__(self, lifted, densitized=False):
        self.lifted = lifted
        self.densitized = densitized
        self.mesh = lifted.space.mesh

    def values(self, points, elements=None):
        """Error at reference ``points`` of every element, shape (T, n)."""
        points = np.atleast_2d(points)
        physical = self.mesh.maps.to_physical(points, elements)
        approx = self.lifted.values(points, elements)
        exact = self.lifted.exact_metric.gauss_curvature(physical)
        if self.densitized:
            approx = approx * checked_metric_jet(self.lifted.metric, points, elements).sqrt_det
            exact = exact * AnalyticTensorField(self.lifted.exact_metric, self.mesh).metric_jet(points, elements).sqrt_det
        return approx - exact


class FunctionError(object):
    """Elementwise difference between a Lagrange function and a callable of the physical points."""

    def __init__(self, function, reference):
        self.function = function
        self.reference = reference
        self.mesh = function.mesh

    def values(self, points, elements=None):
        points = np.atleast_2d(points)
        return self.function.values(points, elements) - self.reference(self.mesh.maps.to_physical(points, elements))


class CallableField(object):
    """A callable of the physical points seen as an elementwise field."""

    def __init__(self, function, mesh):
        self.function = function
        self.mesh = mesh

    def values(self, points, elements=None):
        return self.function(self.mesh.maps.to_physical(np.atleast_2d(points), elements))


def l2_norm(field, order=DEFAULT_ORDER):
    """Euclidean L2 norm over the mesh of anything with ``values(points)``."""
    rule = triangle_rule(order)
    values = field.values(rule.points)
    weights = rule.weights[None, :] * np.abs(field.mesh.maps.det)[:, None]
    return float(np.sqrt(np.sum(weights * values**2)))


def l2_error(lifted, densitized=False, order=DEFAULT_ORDER):
    return l2_norm(CurvatureError(lifted, densitized), order)


def h1_error(function, reference, reference_gradient, order=DEFAULT_ORDER):
    """Broken H1 error of a Lagrange function against a reference with known gradient."""
    rule = triangle_rule(order)
    mesh = function.mesh
    physical = mesh.maps.to_physical(rule.points)
    jet = function.jet(rule.points)
    e0 = jet.value - reference(physical)
    e1 = jet.grad - reference_gradient(physical)
    weights = rule.weights[None, :] * np.abs(mesh.maps.det)[:, None]
    return float(np.sqrt(np.sum(weights * (e0**2 + np.sum(e1**2, axis=-1)))))


def hminus1_norm(field, degree, order=DEFAULT_ORDER, tol=1e-12, verbosity=0):
    """Approximate H^-1 norm of an elementwise field.

    Solves -Laplace(w) = e with homogeneous Dirichlet conditions on the whole
    boundary in Lagrange elements of ``degree`` and returns the full H1 norm
    of w.
    """
    space = LagrangeSpace(field.mesh, degree)
    rule = triangle_rule(order)
    matrix_rule = triangle_rule(2 * degree)

    stiffness = space.stiffness_matrix(matrix_rule)
    mass = space.mass_matrix(rule=matrix_rule)
    load = space.load_vector(field.values(rule.points), rule)

    w = solve_spd(stiffness, load, space.boundary_mask(), 0.0, tol=tol, verbosity=verbosity)
    return float(np.sqrt(w @ (mass @ w) + w @ (stiffness @ w)))


def hminus1_error(lifted, densitized=False, order=DEFAULT_ORDER, tol=1e-12, verbosity=0):
    """H^-1 error of a lifted curvature, computed two degrees above its own."""
    return hminus1_norm(CurvatureError(lifted, densitized), lifted.degree + 2, order, tol, verbosity)


# Convergence rates
########################################


def eoc(errors, hs):
    """Experimental orders of convergence between consecutive levels."""
    errors = np.asarray(errors, dtype=float)
    hs = np.asarray(hs, dtype=float)
    if errors.shape != hs.shape:
        raise ValueError("errors and hs must have the same length")
    if np.any(errors <= 0.0) or np.any(hs <= 0.0):
        raise ValueError("errors and mesh sizes must be positive to compute convergence orders")
    return np.log(errors[1:] / errors[:-1]) / np.log(hs[1:] / hs[:-1])


def fit_order(errors, hs):
    """Least-squares fit of log(error) = log(C) + p log(h).

    Returns
    -------
    order, constant : float
    """
    log_e = np.log(np.asarray(errors, dtype=float))
    log_h = np.log(np.asarray(hs, dtype=float))
    if len(log_e) < 2:
        raise ValueError("At least two levels are needed to fit a convergence order")

    def func2minimize(params, x, data):
        v = params.valuesdict()
        return v["log_C"] + v["order"] * x - data

    params = lmfit.Parameters()
    params.add("order", value=1.0)
    params.add("log_C", value=float(log_e[0] - log_h[0]))
    lm_result = lmfit.minimize(func2minimize, params, args=(log_h, log_e))
    return lm_result.params["order"].value, float(np.exp(lm_result.params["log_C"].value))


@dataclass
class ErrorRecord:
    """Errors of one refinement level of a convergence study."""

    level: int
    h: float
    ndof_metric: int
    ndof_lift: int
    err_L2_K: float
    err_L2_Kw: float
    err_Hm1_K: float
    err_Hm1_Kw: float

    ERROR_COLUMNS = ("err_L2_K", "err_L2_Kw", "err_Hm1_K", "err_Hm1_Kw")

    def as_dict(self):
        return asdict(self)
