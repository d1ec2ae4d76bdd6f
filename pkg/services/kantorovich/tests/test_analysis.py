"""
Tests for moduli, bound checks, statistical convergence, Voronovskaja limits
and rate fits.

Run with: pytest tests/test_analysis.py -v
"""
import math
from fractions import Fraction

import pytest

import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from core.analysis import (
    bound_suite,
    check_auxiliary_bound,
    check_lipschitz,
    check_local_direct,
    check_weighted_interval,
    degree_of_approximation,
    growth_constant,
    lenze_maximal,
    lipschitz_constant,
    majorant_threshold,
    modulus,
    monomial_majorants,
    monomial_norm,
    monomial_norm_records,
    monomial_threshold,
    rate_fit,
    scaled_error_sym,
    stat_density,
    sup_error,
    voronovskaja_check,
    voronovskaja_identity,
    voronovskaja_limit,
    weighted_alpha_norms,
)
from core.catalog import Catalog, get_function
from core.errors import ConfigError, NonPositiveError
from core.ratcore import rf_eval
from schemas.analysis import GridSpec
from schemas.params import OperatorParams

GRID = GridSpec(x_min=0.0, x_max=10.0, points=11)


class TestModulus:
    """First-order, second-order and weighted moduli on the lattice."""

    def test_linear_function(self):
        """omega(t, d) = d, omega_2(t, d) = 0, Omega(t, 0.5) = 0.5/1.25."""
        report = modulus(get_function("t"), 0.5, GRID)
        assert report.omega == pytest.approx(0.5, rel=1e-9)
        assert report.omega2 == pytest.approx(0.0, abs=1e-12)
        assert report.omega_weighted == pytest.approx(0.4, rel=1e-9)

    def test_square_on_interval(self):
        """omega(t^2, d) on [0, b] is d(2b - d): 0.39 for b = 2, d = 0.1."""
        report = modulus(get_function("t2"), 0.1, GridSpec(x_min=0.0, x_max=2.0, points=5), order=1)
        assert report.omega == pytest.approx(0.39, rel=1e-9)

    def test_below_one_lattice_step(self):
        """delta smaller than the lattice spacing is still honoured."""
        report = modulus(get_function("t"), 0.001, GRID, order=1)
        assert report.omega == pytest.approx(0.001, rel=1e-9)
        assert report.omega2 is None

    def test_monotone_and_subadditive(self):
        """omega(d) <= omega(2d) <= 2 omega(d)."""
        f = get_function("sin")
        w1 = modulus(f, 0.3, GRID, order=1).omega
        w2 = modulus(f, 0.6, GRID, order=1).omega
        assert w1 <= w2 <= 2 * w1 + 1e-12

    def test_second_order_dominated(self):
        """omega_2 <= 2 omega."""
        report = modulus(get_function("sqrt"), 0.25, GRID)
        assert report.omega2 <= 2 * report.omega + 1e-12

    def test_invalid_arguments(self):
        """delta <= 0 and unknown orders are rejected."""
        with pytest.raises(ConfigError):
            modulus(get_function("t"), 0.0, GRID)
        with pytest.raises(ConfigError):
            modulus(get_function("t"), 0.1, GRID, order=3)


class TestPointwiseChecks:
    """Direct estimates at a point."""

    def test_sup_error_constant(self):
        """K reproduces constants."""
        assert sup_error(get_function("one"), OperatorParams(n=8, a=1), GRID) <= 1e-12

    def test_local_needs_bounded(self):
        """The local estimate is for bounded functions."""
        with pytest.raises(ConfigError):
            check_local_direct(get_function("t"), OperatorParams(n=8), 1.0, constant=1.0)

    def test_local_record(self):
        """A generous constant is never violated."""
        record = check_local_direct(get_function("exp_neg"), OperatorParams(n=64, a=1), 1.0, constant=10.0)
        assert record.check == "local_direct"
        assert not record.violated

    def test_lipschitz_linear(self):
        """Both Lipschitz records hold for f = t."""
        records = check_lipschitz(get_function("t"), OperatorParams(n=32, a=1), 1.0)
        assert [r.check for r in records] == ["lipschitz", "lipschitz_maximal"]
        assert not any(r.violated for r in records)

    def test_lipschitz_constant_is_local(self):
        """For f = t the ratio grows like sqrt(t + 2) at x = 1, so M depends on the range."""
        f = get_function("t")
        assert lipschitz_constant(f, 1.0, 1.0, 1.0, 1.0, t_max=10.0) == pytest.approx(math.sqrt(12.0), rel=1e-12)
        assert lipschitz_constant(f, 1.0, 1.0, 1.0, 1.0, t_max=50.0) == pytest.approx(math.sqrt(52.0), rel=1e-12)
        record = check_lipschitz(f, OperatorParams(n=32, a=1), 1.0)[0]
        assert record.details["M_t_max"] == 50.0
        assert record.details["M"] == pytest.approx(math.sqrt(52.0), rel=1e-12)

    def test_given_constant_has_no_range(self):
        """An explicit M is not tied to the sampled range."""
        record = check_lipschitz(get_function("t"), OperatorParams(n=32, a=1), 1.0, M=10.0)[0]
        assert "M_t_max" not in record.details

    def test_lipschitz_needs_positive_x(self):
        """x = 0 is excluded."""
        with pytest.raises(ConfigError):
            check_lipschitz(get_function("t"), OperatorParams(n=32), 0.0)

    def test_maximal_function(self):
        """sup |t - x| / |t - x| = 1; tau outside (0, 1] is rejected."""
        assert lenze_maximal(get_function("t"), 2.0, 1.0) == pytest.approx(1.0, rel=1e-9)
        with pytest.raises(ConfigError):
            lenze_maximal(get_function("t"), 2.0, 1.5)

    def test_growth_constant(self):
        """sup t^2/(1+t^2) on [0, 50] is just below 1."""
        assert growth_constant(get_function("t2")) == pytest.approx(2500 / 2501, rel=1e-12)

    def test_weighted_interval(self):
        """x must lie in [0, b]; inside it the estimate holds."""
        params = OperatorParams(n=64, a=1)
        assert not check_weighted_interval(get_function("exp_neg"), params, 1.0, 5.0).violated
        with pytest.raises(ConfigError):
            check_weighted_interval(get_function("exp_neg"), params, 6.0, 5.0)

    def test_auxiliary(self):
        """gamma·||f''||/2 bounds the auxiliary error; f'' sup must be known."""
        params = OperatorParams(n=16, a=1)
        assert not check_auxiliary_bound(get_function("exp_neg"), params, 1.0).violated
        with pytest.raises(ConfigError):
            check_auxiliary_bound(get_function("sqrt"), params, 1.0)


class TestWeightedNorms:
    """Exact test-function norms and their majorants."""

    def test_constant_exact(self):
        """K e_0 = e_0."""
        assert monomial_norm(0, OperatorParams(n=10, a=2)).value == 0.0

    def test_e2_limit_at_infinity(self):
        """(T_2 - x^2)/(1+x^2) tends to -1/(n+1)."""
        norm = monomial_norm(2, OperatorParams(n=10, a=1))
        assert norm.limit_at_infinity == pytest.approx(1 / 11, rel=1e-12)
        assert norm.value >= norm.limit_at_infinity

    @pytest.mark.parametrize("n,a", [(1, 0), (10, 1), (100, 3)])
    def test_majorants_hold(self, n, a):
        """No majorant record is violated."""
        records = monomial_norm_records(OperatorParams(n=n, a=a))
        assert not [r.check for r in records if r.violated]

    def test_majorant_values(self):
        """0.035 for e_1 at a=1, n=99; 0.030434 for e_2 at a=0, n=99."""
        assert monomial_majorants(1, 99, 1.0)["majorant"] == pytest.approx(0.035, rel=1e-12)
        assert monomial_majorants(2, 99, 0.0)["majorant"] == pytest.approx(0.030434, abs=1e-6)

    def test_unknown_index(self):
        """Only e_0, e_1, e_2."""
        with pytest.raises(ConfigError):
            monomial_norm(3, OperatorParams(n=1))
        with pytest.raises(ConfigError):
            monomial_majorants(3, 1, 0.0)

    def test_alpha_norms_positive_alpha(self):
        """alpha <= 0 is rejected."""
        with pytest.raises(ConfigError):
            weighted_alpha_norms(get_function("t"), 1, [8], 0.0)

    def test_alpha_norms_at_given_points(self):
        """Sampling only x = 0: |K_n f(0) - f(0)| since rho(0) = 1."""
        f = get_function("t")
        [(n, value)] = weighted_alpha_norms(f, 0, [8], 1.0, xs=[0.0])
        assert n == 8
        assert value == pytest.approx(0.5 / 9, rel=1e-12)
        with pytest.raises(ConfigError):
            weighted_alpha_norms(f, 0, [8], 1.0, xs=[])


class TestStatistical:
    """Thresholds and Cesaro densities."""

    def test_e1_threshold(self):
        """(2a + 1.5)/(k+1) >= 0.01 up to k = 349 for a = 1."""
        assert monomial_threshold(1, 1.0, 0.01) == 349

    def test_threshold_edges(self):
        """No member at all, e_0, and a non-positive epsilon."""
        assert majorant_threshold(lambda k: 1.0 / k, 2.0) == 0
        assert monomial_threshold(0, 1.0, 0.01) == 0
        with pytest.raises(ConfigError):
            majorant_threshold(lambda k: 1.0 / k, 0.0)

    def test_threshold_bisection(self):
        """1/k >= 1/37 exactly up to k = 37."""
        assert majorant_threshold(lambda k: 1.0 / k, 1.0 / 37) == 37

    def test_density(self):
        """Members and running density."""
        curve = stat_density([0.5, 0.2, 0.05, 0.3], 0.25, threshold=4)
        assert curve.members == [1, 4]
        assert curve.density == pytest.approx([1.0, 0.5, 1 / 3, 0.5])
        assert curve.last_member == 4
        assert curve.respects_threshold

    def test_density_no_members(self):
        """An empty member set has density 0."""
        curve = stat_density([0.1, 0.1], 0.5)
        assert curve.members == []
        assert curve.last_member is None
        assert curve.density == [0.0, 0.0]

    def test_non_convergent_control(self):
        """Constant b_k = 1 keeps density 1; b_k = 1/k drops to 10/n."""
        assert stat_density([1.0] * 50, 0.5).density == [1.0] * 50
        harmonic = stat_density([1.0 / k for k in range(1, 201)], 0.1)
        assert harmonic.density[-1] == pytest.approx(10 / 200)

    def test_threshold_violated(self):
        """A member past the threshold is reported."""
        assert not stat_density([0.1, 0.1, 0.9], 0.5, threshold=2).respects_threshold


class TestVoronovskaja:
    """Limits of n·(K f - f)."""

    def test_scaled_error_exact(self):
        """8·(T_{8,2}(1) - 1) = 398/243 for a = 1."""
        assert rf_eval(scaled_error_sym(2, OperatorParams(n=8, a=1)), Fraction(1)) == Fraction(398, 243)

    @pytest.mark.parametrize("power", [0, 1, 2, 3, 4])
    @pytest.mark.parametrize("a", [0, Fraction(3, 2)])
    def test_identity(self, power, a):
        """The exact limit matches the first- and second-derivative expression."""
        assert voronovskaja_identity(power, a)

    def test_numeric_convergence(self):
        """|L_n - limit| <= |c - 2 limit|/n + (|limit| + 1)/n^2 for t^2 at x = 1, a = 0."""
        record = voronovskaja_check(get_function("t2"), 0, 1.0, 0, [64, 128, 256])
        limit = voronovskaja_limit(get_function("t2"), 0.0, 1.0, 0)
        assert limit == pytest.approx(1.0)
        c = 1 / 3 - 1.0
        for row in record.rows:
            assert row.abs_diff <= abs(c - 2 * limit) / row.n + (abs(limit) + 1) / row.n ** 2 + 1e-9
        assert record.decay is not None
        assert record.decay.exponent == pytest.approx(1.0, abs=0.1)

    def test_limit_orders(self):
        """Only r = 0 and r = 1; x must be positive."""
        with pytest.raises(ConfigError):
            voronovskaja_limit(get_function("t2"), 0.0, 1.0, 2)
        with pytest.raises(ConfigError):
            voronovskaja_check(get_function("t2"), 0, 0.0, 0, [8, 16, 32])


class TestRates:
    """Least-squares decay exponents."""

    def test_exact_power_law(self):
        """3/n fits exponent 1 and constant 3."""
        fit = rate_fit([(n, 3.0 / n) for n in (8, 16, 32, 64)])
        assert fit.exponent == pytest.approx(1.0, abs=1e-12)
        assert fit.constant == pytest.approx(3.0, rel=1e-9)
        assert fit.residual <= 1e-12

    def test_rate_fit_errors(self):
        """Too few points or a zero error."""
        with pytest.raises(ConfigError):
            rate_fit([(8, 1.0), (16, 0.5)])
        with pytest.raises(NonPositiveError) as exc:
            rate_fit([(8, 1.0), (16, 0.0), (32, 0.1)])
        assert exc.value.exit_code == 2

    def test_degree_of_approximation(self):
        """Smooth functions converge at rate 1/n."""
        sups, fit = degree_of_approximation(get_function("exp_neg"), 1, 0, (0.5, 2.0), [32, 64, 128, 256], points=5)
        assert [n for n, _ in sups] == [32, 64, 128, 256]
        assert fit.exponent == pytest.approx(1.0, abs=0.15)

    def test_degree_interval(self):
        """The interval must satisfy 0 < c < d."""
        with pytest.raises(ConfigError):
            degree_of_approximation(get_function("exp_neg"), 1, 0, (0.0, 2.0), [8, 16, 32])


class TestBoundSuite:
    """End-to-end calibration plus validation on a small grid."""

    def test_small_suite(self):
        """Constants are fitted and every record carries finite sides."""
        result = bound_suite(
            Catalog(),
            n_values=(16,),
            a_values=(1.0,),
            x_values=(1.0,),
            calibration={"n_values": (8,), "a_values": (0.5,), "x_values": (0.35,)},
        )
        assert [c.name for c in result.constants] == ["local_C", "weighted_M1", "weighted_M1_apriori"]
        assert result.records
        assert all(math.isfinite(r.actual) and math.isfinite(r.bound) for r in result.records)
