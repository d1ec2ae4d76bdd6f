"""
Tests for the function catalog and user-declared functions.

Run with: pytest tests/test_catalog.py -v
"""
import numpy as np
import pytest

import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from core.catalog import (
    BV_CATALOG,
    Catalog,
    abs_shift,
    get_function,
    monomial,
    monomial_power,
    piecewise_linear,
    shifted_linear,
)
from core.errors import ConfigError, MissingOneSidedData
from models.function_spec import FunctionSpec


class TestBuiltins:
    """Built-in entries and their metadata."""

    def test_ids(self):
        """Monomials and the named functions are all present."""
        ids = Catalog().ids()
        for ident in ("one", "t", "t2", "t6", "exp_neg", "sin", "sqrt", "abs_kink", "multikink", "inv1p"):
            assert ident in ids
        assert set(BV_CATALOG) <= set(ids)

    def test_unknown_id(self):
        """Unknown ids list the known ones."""
        with pytest.raises(ConfigError) as exc:
            get_function("cosh")
        assert exc.value.exit_code == 1
        assert "exp_neg" in exc.value.detail

    def test_monomial_power(self):
        """Ids map back to exponents; other ids give None."""
        assert monomial_power("one") == 0
        assert monomial_power("t") == 1
        assert monomial_power("t5") == 5
        assert monomial_power("t7") is None
        assert monomial_power("exp_neg") is None

    def test_monomial_range(self):
        """Only t^0..t^6."""
        with pytest.raises(ConfigError):
            monomial(7)

    def test_monomial_derivatives(self):
        """d^2/dt^2 t^3 = 6t, derivatives past the degree vanish."""
        f = get_function("t3")
        assert float(f.derivative(2)(np.asarray(2.0))) == pytest.approx(12.0)
        assert float(f.derivative(5)(np.asarray(2.0))) == 0.0
        with pytest.raises(MissingOneSidedData):
            f.derivative(6)

    def test_abs_kink(self):
        """|t - 1| with one-sided slopes at 1."""
        f = get_function("abs_kink")
        assert float(f(0.0)) == 1.0
        assert float(f(3.0)) == 2.0
        assert f.breakpoints == (1.0,)
        assert f.fprime_sides(1.0) == (-1.0, 1.0)
        assert f.value_sides(1.0) == (0.0, 0.0)

    def test_multikink(self):
        """Kinks at 0.5, 1.5 and 3 with the slope jumps as variation."""
        f = get_function("multikink")
        assert f.breakpoints == (0.5, 1.5, 3.0)
        assert f.tv_hint(0.0, 4.0) == pytest.approx(2.0 + 1.5 + 0.5)
        assert f.tv_hint(0.5, 1.5) == 0.0

    def test_shifted_linear(self):
        """t - x0."""
        assert float(shifted_linear(2.0)(5.0)) == 3.0


class TestFactories:
    """Piecewise-linear declarations."""

    def test_points_must_start_at_zero(self):
        """The first abscissa is 0."""
        with pytest.raises(ConfigError):
            piecewise_linear("p", [(1.0, 0.0), (2.0, 1.0)])

    def test_strictly_increasing(self):
        """Repeated abscissae are rejected."""
        with pytest.raises(ConfigError):
            piecewise_linear("p", [(0.0, 0.0), (1.0, 1.0), (1.0, 2.0)])

    def test_tail_slope(self):
        """Past the last point f continues with tail_slope."""
        f = piecewise_linear("ramp", [(0.0, 0.0), (1.0, 1.0)], tail_slope=2.0)
        assert float(f(3.0)) == pytest.approx(5.0)
        assert f.fprime_sides(1.0) == (1.0, 2.0)

    def test_collinear_points_no_kink(self):
        """A point on a straight line is not a breakpoint."""
        f = piecewise_linear("line", [(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)], tail_slope=1.0)
        assert f.breakpoints == ()

    def test_abs_center(self):
        """The kink must be at c > 0."""
        with pytest.raises(ConfigError):
            abs_shift(0.0)


class TestCatalog:
    """User registration and contract checks."""

    def test_add_user_function(self):
        """User functions become available by id."""
        catalog = Catalog([abs_shift(2.0, "kink2")])
        assert "kink2" in catalog
        assert float(catalog.get("kink2")(0.0)) == 2.0

    def test_duplicate_id(self):
        """User ids may not shadow built-ins."""
        with pytest.raises(ConfigError):
            Catalog([abs_shift(1.0, "abs_kink")])

    def test_growth_contract(self):
        """t^3 does not fit M(1 + t^2)."""
        fast = FunctionSpec(id="fast", value=lambda t: t ** 3, growth_gamma=2.0, growth_M=1.0)
        with pytest.raises(ConfigError):
            Catalog([fast])

    def test_breakpoint_needs_sides(self):
        """A declared breakpoint without one-sided data is rejected."""
        bad = FunctionSpec(id="bad", value=lambda t: np.abs(t - 1.0), breakpoints=(1.0,), growth_gamma=1.0)
        with pytest.raises(ConfigError):
            Catalog([bad])
