import math

import numpy as np
import pytest

from longwave.fem.quadrature import edge_rule, triangle_rule


def exact_monomial(a, b):
    # int_T x^a y^b over the reference triangle = a! b! / (a+b+2)!
    return math.factorial(a) * math.factorial(b) / math.factorial(a + b + 2)


@pytest.mark.parametrize("degree", range(0, 13))
def test_monomial_exactness(degree):
    rule = triangle_rule(degree)
    for a in range(degree + 1):
        for b in range(degree + 1 - a):
            got = float(np.sum(rule.weights * rule.points[:, 0] ** a * rule.points[:, 1] ** b))
            assert got == pytest.approx(exact_monomial(a, b), rel=1e-13, abs=1e-15)


@pytest.mark.parametrize("degree", range(0, 13))
def test_weights_positive_and_sum_to_area(degree):
    rule = triangle_rule(degree)
    assert np.all(rule.weights > 0)
    assert float(rule.weights.sum()) == pytest.approx(0.5, rel=1e-14)


@pytest.mark.parametrize("degree", range(0, 10))
def test_edge_rule_exactness(degree):
    t, w = edge_rule(degree)
    for p in range(degree + 1):
        assert float(np.sum(w * t**p)) == pytest.approx(1.0 / (p + 1), rel=1e-13)
