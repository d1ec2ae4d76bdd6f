"""
Tests for exact rational functions p(x)/(1+x)^m.

Run with: pytest tests/test_ratcore.py -v
"""
import random
from fractions import Fraction

import numpy as np
import pytest

import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from core.errors import ConfigError, DivisionNotExact, OrderUndefined, PoleError
from core.ratcore import RatFunc, exact_divide, normalize, rf_arith, rf_derive, rf_eval, rf_leading_order

X = RatFunc.x()


class TestNormalization:
    """Construction always yields the reduced form."""

    def test_common_factor_cancels(self):
        """(1+x)/(1+x) is the constant 1."""
        f = RatFunc((1, 1), 1)
        assert f == RatFunc.const(1)
        assert f.pole_order == 0

    def test_trailing_zeros_stripped(self):
        """Zero leading coefficients are dropped."""
        f = RatFunc((2, 3, 0, 0), 0)
        assert f.coeffs == (Fraction(2), Fraction(3))
        assert f.degree == 1

    def test_zero(self):
        """The zero function has no coefficients."""
        assert RatFunc().is_zero
        assert (X - X).is_zero

    def test_negative_pole_order(self):
        """pole_order < 0 is rejected."""
        with pytest.raises(ConfigError) as exc:
            RatFunc((1,), -1)
        assert exc.value.exit_code == 1

    def test_normalize_idempotent(self):
        """normalize() returns an equal value."""
        f = RatFunc((1, 2, 1), 3)
        assert normalize(f) == f == RatFunc((1,), 1)


class TestArithmetic:
    """add, sub, mul, division and derivatives stay in the family."""

    def test_add_lifts_to_common_pole(self):
        """x + 1/(1+x) = (1 + x + x^2)/(1+x)."""
        f = X + RatFunc.inv_one_plus_x()
        assert f == RatFunc((1, 1, 1), 1)

    def test_mul_and_pow(self):
        """(1+x)^2 times 1/(1+x)^2 is 1."""
        assert RatFunc((1, 1)) ** 2 * RatFunc.inv_one_plus_x(2) == RatFunc.const(1)

    def test_rf_arith_dispatch(self):
        """rf_arith matches the operators."""
        f, g = RatFunc((1, 2), 1), RatFunc((3,), 2)
        assert rf_arith(f, g, "add") == f + g
        assert rf_arith(f, g, "sub") == f - g
        assert rf_arith(f, g, "mul") == f * g

    def test_rf_arith_unknown(self):
        """Unknown operations are configuration errors."""
        with pytest.raises(ConfigError):
            rf_arith(X, X, "div")

    def test_derivative_of_pole(self):
        """d/dx 1/(1+x) = -1/(1+x)^2."""
        assert rf_derive(RatFunc.inv_one_plus_x()) == RatFunc((-1,), 2)

    def test_derivative_of_polynomial(self):
        """d/dx (x^3 + 2x) = 3x^2 + 2."""
        assert rf_derive(X ** 3 + 2 * X) == RatFunc((2, 0, 3))

    def test_exact_divide_by_one_plus_x(self):
        """x / (2 + 2x) = (x/2)/(1+x)."""
        assert X / RatFunc((2, 2)) == RatFunc((0, Fraction(1, 2)), 1)

    def test_exact_divide_removes_pole(self):
        """Dividing by 1/(1+x) multiplies by (1+x)."""
        assert exact_divide(X, RatFunc.inv_one_plus_x()) == RatFunc((0, 1, 1))

    def test_division_not_exact(self):
        """Dividing by x leaves the family."""
        with pytest.raises(DivisionNotExact) as exc:
            RatFunc.const(1) / X
        assert exc.value.exit_code == 2

    def test_division_by_zero(self):
        """Constant zero divisor."""
        with pytest.raises(ZeroDivisionError):
            X / 0


class TestEvaluation:
    """Exact and float evaluation."""

    def test_exact_value(self):
        """(1+x+x^2)/(1+x) at 1 is 3/2 exactly."""
        assert rf_eval(RatFunc((1, 1, 1), 1), Fraction(1)) == Fraction(3, 2)

    def test_float_vector(self):
        """numpy input evaluates elementwise."""
        xs = np.array([0.0, 1.0, 3.0])
        np.testing.assert_allclose(rf_eval(RatFunc((1, 1, 1), 1), xs), (1 + xs + xs ** 2) / (1 + xs))

    def test_pole(self):
        """x = -1 is a pole only when pole_order > 0."""
        with pytest.raises(PoleError):
            rf_eval(RatFunc.inv_one_plus_x(), -1)
        with pytest.raises(PoleError):
            rf_eval(RatFunc.inv_one_plus_x(), np.array([0.0, -1.0]))
        assert rf_eval(X ** 2, -1) == 1

    def test_json_shape(self):
        """Coefficients serialize as reduced p/q strings."""
        f = RatFunc((Fraction(1, 10), Fraction(11, 10), Fraction(4, 5)), 1)
        assert f.to_json() == {"num": ["1/10", "11/10", "4/5"], "pole_order": 1}
        assert RatFunc.from_json(f.to_json()) == f


class TestLeadingOrder:
    """Ratio-test exponent of a sequence in n."""

    def test_inverse_square(self):
        """c/n^2 has exponent 2."""
        seq = [(n, RatFunc.const(Fraction(3, n * n)) * (1 + X)) for n in (8, 16, 32)]
        order = rf_leading_order(seq, 1.0)
        assert order.exponent == pytest.approx(2.0)
        assert order.n_values == (8, 16, 32)

    def test_too_few_points(self):
        """Two values are not enough."""
        with pytest.raises(ConfigError):
            rf_leading_order([(1, X), (2, X)], 1.0)

    def test_vanishing_value(self):
        """A zero value leaves the order undefined."""
        seq = [(1, X), (2, RatFunc()), (4, X)]
        with pytest.raises(OrderUndefined):
            rf_leading_order(seq, 1.0)


def random_ratfunc(rng):
    """Small random member of the family: degree <= 3, pole order <= 3."""
    coeffs = [Fraction(rng.randint(-5, 5), rng.randint(1, 4)) for _ in range(rng.randint(1, 4))]
    return RatFunc(tuple(coeffs), rng.randint(0, 3))


class TestAlgebraicLaws:
    """Field-like laws on random operands."""

    @pytest.mark.parametrize("seed", range(5))
    def test_commutative(self, seed):
        rng = random.Random(seed)
        for _ in range(20):
            f, g = random_ratfunc(rng), random_ratfunc(rng)
            assert rf_arith(f, g, "add") == rf_arith(g, f, "add")
            assert rf_arith(f, g, "mul") == rf_arith(g, f, "mul")

    @pytest.mark.parametrize("seed", range(5))
    def test_associative(self, seed):
        rng = random.Random(100 + seed)
        for _ in range(20):
            f, g, h = random_ratfunc(rng), random_ratfunc(rng), random_ratfunc(rng)
            assert rf_arith(rf_arith(f, g, "add"), h, "add") == rf_arith(f, rf_arith(g, h, "add"), "add")
            assert rf_arith(rf_arith(f, g, "mul"), h, "mul") == rf_arith(f, rf_arith(g, h, "mul"), "mul")

    @pytest.mark.parametrize("seed", range(5))
    def test_distributive_and_inverse(self, seed):
        """f(g + h) = fg + fh and f - f = 0."""
        rng = random.Random(200 + seed)
        for _ in range(20):
            f, g, h = random_ratfunc(rng), random_ratfunc(rng), random_ratfunc(rng)
            assert f * (g + h) == f * g + f * h
            assert rf_arith(f, f, "sub").is_zero

    @pytest.mark.parametrize("seed", range(5))
    def test_evaluation_is_a_homomorphism(self, seed):
        """(f op g)(x) = f(x) op g(x) exactly."""
        rng = random.Random(300 + seed)
        for _ in range(20):
            f, g = random_ratfunc(rng), random_ratfunc(rng)
            x = Fraction(rng.randint(0, 40), rng.randint(1, 8))
            assert rf_eval(f + g, x) == rf_eval(f, x) + rf_eval(g, x)
            assert rf_eval(f * g, x) == rf_eval(f, x) * rf_eval(g, x)


class TestDerivativeAgainstDifferences:
    """rf_derive agrees with central differences of rf_eval."""

    @pytest.mark.parametrize("seed", range(5))
    def test_central_difference(self, seed):
        rng = random.Random(400 + seed)
        h = Fraction(1, 10 ** 7)
        for _ in range(20):
            f = random_ratfunc(rng)
            x = Fraction(rng.randint(0, 30), 10)
            numeric = float((rf_eval(f, x + h) - rf_eval(f, x - h)) / (2 * h))
            exact = float(rf_eval(rf_derive(f), x))
            assert numeric == pytest.approx(exact, rel=1e-8, abs=1e-8), str(f)

    def test_product_rule(self):
        """(fg)' = f'g + fg' on random operands."""
        rng = random.Random(7)
        for _ in range(20):
            f, g = random_ratfunc(rng), random_ratfunc(rng)
            assert rf_derive(f * g) == rf_derive(f) * g + f * rf_derive(g)
