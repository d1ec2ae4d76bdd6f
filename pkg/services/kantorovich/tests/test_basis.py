"""
Tests for the generalized Baskakov basis.

Run with: pytest tests/test_basis.py -v
"""
from fractions import Fraction

import numpy as np
import pytest

import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from core.basis import (
    baskakov_classical_weight,
    pk_direct,
    pk_recurrence,
    rising_factorial,
    weight,
    weight_log_derivative_check,
    weight_row,
)
from core.errors import ConfigError, TruncationFailure
from schemas.params import OperatorParams, TruncationPolicy


class TestPolynomials:
    """P_k(n, a) from the definition and from the three-term recurrence."""

    def test_rising_factorial(self):
        """(3)_0 = 1, (3)_3 = 60."""
        assert rising_factorial(3, 0) == 1
        assert rising_factorial(3, 2) == 12
        assert rising_factorial(5, 3) == 210
        assert rising_factorial(3, 3) == 60

    def test_small_polynomials(self):
        """P_0 = 1, P_1 = a + n, P_2(4, 1) = 29."""
        params = OperatorParams(n=4, a=1)
        assert pk_direct(0, params) == 1
        assert pk_direct(1, params) == 5
        assert pk_direct(2, params) == 29

    def test_recurrence_matches_definition(self):
        """Both constructions agree exactly."""
        params = OperatorParams(n=3, a=Fraction(5, 2))
        assert pk_recurrence(10, params) == [pk_direct(k, params) for k in range(11)]

    def test_a_zero(self):
        """a = 0 gives P_k = (n)_k."""
        params = OperatorParams(n=4, a=0)
        assert pk_recurrence(5, params) == [rising_factorial(4, k) for k in range(6)]

    def test_negative_k_max(self):
        """k_max < 0 is rejected."""
        with pytest.raises(ConfigError):
            pk_recurrence(-1, OperatorParams(n=1))


class TestWeights:
    """Float weights and rows."""

    def test_classical_limit(self):
        """a = 0 reproduces the classical Baskakov weights."""
        params = OperatorParams(n=5, a=0)
        for k in range(21):
            assert weight(k, params, 0.7) == pytest.approx(baskakov_classical_weight(k, 5, 0.7), rel=1e-12)

    def test_first_weight(self):
        """W_0 = e^{-ax/(1+x)}/(1+x)^n; 1/2 at n=1, a=0, x=1."""
        assert weight(0, OperatorParams(n=1, a=0), 1.0) == pytest.approx(0.5, rel=1e-15)
        expected = np.exp(-2.0 * 0.5 / 1.5) / 1.5 ** 3
        assert weight(0, OperatorParams(n=3, a=2), 0.5) == pytest.approx(expected, rel=1e-13)

    def test_row_sum_tight(self):
        """n=10, a=0, x=1 sums to 1 within 1e-13."""
        row = weight_row(OperatorParams(n=10, a=0), 1.0)
        assert abs(row.total - 1.0) <= 1e-13

    def test_row_matches_single_weights(self):
        """weight(k) equals the k-th row entry."""
        params = OperatorParams(n=6, a=1.5)
        row = weight_row(params, 2.0)
        for k in (0, 3, 11):
            assert row.values[k] == pytest.approx(weight(k, params, 2.0), rel=1e-13)

    def test_x_zero(self):
        """At x = 0 all mass sits on k = 0."""
        row = weight_row(OperatorParams(n=7, a=2), 0.0)
        assert list(row.values) == [1.0]
        assert row.tail_mass == 0.0

    @pytest.mark.parametrize("n", [1, 16, 256])
    @pytest.mark.parametrize("a", [0.0, 1.0, 3.0])
    @pytest.mark.parametrize("x", [0.1, 1.0, 5.0])
    def test_partition_of_unity(self, n, a, x):
        """Row mass plus certified tail is 1."""
        row = weight_row(OperatorParams(n=n, a=a), x)
        assert abs(row.total + row.tail_mass - 1.0) <= 1e-12
        assert np.all(row.values >= 0)

    def test_no_underflow_for_large_n(self):
        """W_0 = 4^-5000 is far below the double range; the row still sums to 1."""
        row = weight_row(OperatorParams(n=5000, a=1), 3.0)
        assert row.total == pytest.approx(1.0, abs=1e-12)

    def test_log_derivative_identity(self):
        """x(1+x)^2 W' = ((k - nx)(1+x) - ax) W."""
        params = OperatorParams(n=4, a=1)
        assert weight_log_derivative_check(3, params, 0.5) <= 1e-8

    def test_budget_exhausted(self):
        """A tiny term budget cannot certify the tail."""
        with pytest.raises(TruncationFailure) as exc:
            weight_row(OperatorParams(n=10, a=0), 5.0, TruncationPolicy(max_terms=5))
        assert exc.value.exit_code == 2

    def test_invalid_arguments(self):
        """Negative x or k are configuration errors."""
        with pytest.raises(ConfigError):
            weight_row(OperatorParams(n=1), -0.5)
        with pytest.raises(ConfigError):
            weight(-1, OperatorParams(n=1), 1.0)
