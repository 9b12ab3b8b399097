import numpy as np
import pytest

from reggecurv.benchmark import SphereMetric
from reggecurv.curvature import LiftedCurvature, lift_curvature
from reggecurv.fields import LagrangeFunction, ReggeFunction
from reggecurv.mesh import structured_square, unit_square
from reggecurv.norms import (
    CallableField,
    ErrorRecord,
    FunctionError,
    eoc,
    fit_order,
    h1_error,
    hminus1_error,
    hminus1_norm,
    l2_error,
    l2_norm,
)
from reggecurv.spaces import LagrangeSpace, ReggeSpace


def l2_constant_test(perturbed_mesh):
    field = CallableField(lambda p: np.ones(p.shape[:-1]), perturbed_mesh)
    assert l2_norm(field) == pytest.approx(1.0, rel=1e-13)


def l2_exact_match_test(perturbed_mesh):
    space = LagrangeSpace(perturbed_mesh, 2)

    def quadratic(p):
        return p[..., 0] ** 2 - p[..., 0] * p[..., 1]

    u = LagrangeFunction(space, space.interpolate(quadratic))
    assert l2_norm(FunctionError(u, quadratic)) <= 1e-13


def zero_curvature_against_sphere_test():
    mesh = structured_square(2)
    space = LagrangeSpace(mesh, 1)
    lifted = LiftedCurvature(LagrangeFunction(space, np.zeros(space.ndofs)), None, SphereMetric())
    assert l2_error(lifted) == pytest.approx(1.0, rel=1e-13)


def h1_test():
    mesh = unit_square(1, perturb=True, seed=0)
    space = LagrangeSpace(mesh, 1)
    zero = LagrangeFunction(space, np.zeros(space.ndofs))

    def x(p):
        return p[..., 0]

    def grad_x(p):
        return np.stack([np.ones(p.shape[:-1]), np.zeros(p.shape[:-1])], axis=-1)

    assert h1_error(zero, x, grad_x) == pytest.approx(np.sqrt(1.0 / 3.0 + 1.0), rel=1e-13)
    assert h1_error(LagrangeFunction(space, space.interpolate(x)), x, grad_x) <= 1e-13


def hminus1_zero_test():
    mesh = structured_square(2)
    assert hminus1_norm(CallableField(lambda p: np.zeros(p.shape[:-1]), mesh), 2) == 0.0


def hminus1_eigenfunction_test():
    mesh = structured_square(4)

    def eigenfunction(p):
        return np.sin(np.pi * p[..., 0]) * np.sin(np.pi * p[..., 1])

    expected = np.sqrt(0.25 + np.pi**2 / 2.0) / (2.0 * np.pi**2)
    assert hminus1_norm(CallableField(eigenfunction, mesh), 3) == pytest.approx(expected, rel=1e-4)


def hminus1_error_test():
    mesh = structured_square(2)
    space = LagrangeSpace(mesh, 1)
    lifted = LiftedCurvature(LagrangeFunction(space, np.zeros(space.ndofs)), None, SphereMetric())

    # -Laplace w = -1 with w = 0 on the boundary; the H^-1 norm of a constant is below its L2 norm
    value = hminus1_error(lifted)
    assert 0.0 < value < 1.0


def eoc_test():
    np.testing.assert_allclose(eoc([1.0, 1.0 / 4.0, 1.0 / 16.0], [1.0, 0.5, 0.25]), [2.0, 2.0])
    np.testing.assert_allclose(eoc([1.0, 1.0 / 8.0], [1.0, 0.5]), [3.0])
    np.testing.assert_allclose(eoc([0.3, 0.3, 0.3], [1.0, 0.5, 0.25]), [0.0, 0.0], atol=1e-15)

    with pytest.raises(ValueError):
        eoc([1.0, 0.0], [1.0, 0.5])


def fit_order_test():
    hs = 2.0 ** -np.arange(1, 6)
    order, constant = fit_order(3.0 * hs**2.5, hs)
    assert order == pytest.approx(2.5, rel=1e-6)
    assert constant == pytest.approx(3.0, rel=1e-5)


def record_test():
    record = ErrorRecord(1, 0.5, 10, 9, 1e-2, 2e-2, 1e-3, 2e-3)
    assert list(record.as_dict()) == ["level", "h", "ndof_metric", "ndof_lift"] + list(ErrorRecord.ERROR_COLUMNS)


def absolute_homogeneity_test(perturbed_mesh):
    def bump(p):
        return np.exp(p[..., 0]) * np.cos(3.0 * p[..., 1]) - 0.5

    space = LagrangeSpace(perturbed_mesh, 2)
    u = LagrangeFunction(space, space.interpolate(lambda p: p[..., 0] * p[..., 1]))

    def zero(p):
        return np.zeros(p.shape[:-1])

    def zero_gradient(p):
        return np.zeros(p.shape[:-1] + (2,))

    base_l2 = l2_norm(CallableField(bump, perturbed_mesh))
    base_hm1 = hminus1_norm(CallableField(bump, perturbed_mesh), 3)
    base_h1 = h1_error(u, zero, zero_gradient)
    for c in (-3.0, 0.25, 7.5):
        field = CallableField(lambda p: c * bump(p), perturbed_mesh)
        assert l2_norm(field) == pytest.approx(abs(c) * base_l2, rel=1e-12)
        assert hminus1_norm(field, 3) == pytest.approx(abs(c) * base_hm1, rel=1e-10)
        scaled = LagrangeFunction(space, c * u.coefficients)
        assert h1_error(scaled, zero, zero_gradient) == pytest.approx(abs(c) * base_h1, rel=1e-12)


# With -Laplace w = e, |w|_1^2 = (e, w) and the Poincare constant 1 / (sqrt(2) pi) of the
# unit square give ||w||_H1 <= sqrt(1 / (2 pi^2) + 1 / (4 pi^4)) ||e||_L2 < 0.231 ||e||_L2.
HMINUS1_OVER_L2 = 0.231


@pytest.mark.parametrize("densitized", [False, True])
def hminus1_below_l2_test(densitized, benchmark_metric):
    for level in (1, 2):
        mesh = unit_square(level, perturb=True, seed=level)
        space = ReggeSpace(mesh, 1)
        metric_h = ReggeFunction(space, space.interpolate(benchmark_metric))
        lifted = lift_curvature(metric_h, benchmark_metric, 1, verbosity=0)
        l2 = l2_error(lifted, densitized)
        assert 0.0 < hminus1_error(lifted, densitized) <= HMINUS1_OVER_L2 * l2

    field = CallableField(lambda p: np.sign(p[..., 0] - 0.4) + p[..., 1] ** 3, structured_square(3))
    assert hminus1_norm(field, 2) <= HMINUS1_OVER_L2 * l2_norm(field)
