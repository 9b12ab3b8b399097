from math import factorial

import numpy as np
import pytest

from reggecurv.quadrature import segment_rule, triangle_rule


def segment_examples_test():
    rule = segment_rule(1)
    assert len(rule) == 1
    assert rule.integrate(rule.points) == pytest.approx(0.5)

    rule = segment_rule(5)
    assert rule.integrate(rule.points**5) == pytest.approx(1.0 / 6.0)
    assert rule.weights.sum() == pytest.approx(1.0)


@pytest.mark.parametrize("exactness", range(0, 16))
def segment_exactness_test(exactness):
    rule = segment_rule(exactness)
    assert rule.exactness_degree >= exactness
    assert np.all(rule.weights > 0)
    assert np.all((rule.points > 0) & (rule.points < 1))
    for p in range(exactness + 1):
        assert rule.integrate(rule.points**p) == pytest.approx(1.0 / (p + 1), rel=1e-13)


def triangle_monomial(a, b):
    return factorial(a) * factorial(b) / factorial(a + b + 2)


def triangle_examples_test():
    rule = triangle_rule(4)
    x, y = rule.points.T
    assert rule.weights.sum() == pytest.approx(0.5)
    assert rule.integrate(x**2 * y**2) == pytest.approx(1.0 / 180.0)

    rule = triangle_rule(7)
    x, y = rule.points.T
    assert rule.integrate(x**4 * y**3) == pytest.approx(1.0 / 2520.0)


@pytest.mark.parametrize("exactness", [0, 1, 2, 3, 6, 9, 12, 20])
def triangle_exactness_test(exactness):
    rule = triangle_rule(exactness)
    x, y = rule.points.T
    assert np.all(rule.weights > 0)
    assert np.all((x > 0) & (y > 0) & (x + y < 1))
    for a in range(exactness + 1):
        for b in range(exactness + 1 - a):
            assert rule.integrate(x**a * y**b) == pytest.approx(triangle_monomial(a, b), rel=1e-12)


def cache_test():
    assert triangle_rule(6) is triangle_rule(6)
    with pytest.raises(ValueError):
        segment_rule(-1)
