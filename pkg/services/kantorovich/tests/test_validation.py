"""
Tests for run-parameter validation.

Run with: pytest tests/test_validation.py -v
"""
import pytest

import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from core.catalog import Catalog
from core.errors import ConfigError
from core.validation import (
    coerce_format,
    ensure_known_functions,
    validate_a_values,
    validate_delta,
    validate_n_values,
    validate_x_values,
)


class TestValidateN:
    """Tests for validate_n_values function"""

    def test_sorted(self):
        """Valid lists come back ascending"""
        assert validate_n_values([64, 16, 256]) == [16, 64, 256]

    def test_empty(self):
        """Empty list raises"""
        with pytest.raises(ConfigError) as exc:
            validate_n_values([])
        assert exc.value.exit_code == 1

    def test_duplicate(self):
        """Duplicates raise"""
        with pytest.raises(ConfigError) as exc:
            validate_n_values([16, 16])
        assert "Duplicate" in exc.value.detail

    @pytest.mark.parametrize("bad", [0, -3, 2.5, True])
    def test_invalid(self, bad):
        """n must be an integer >= 1"""
        with pytest.raises(ConfigError):
            validate_n_values([bad])


class TestValidateA:
    """Tests for validate_a_values function"""

    def test_valid(self):
        assert validate_a_values([0.0, 1.5]) == [0.0, 1.5]

    @pytest.mark.parametrize("bad", [-0.1, float("inf"), float("nan")])
    def test_invalid(self, bad):
        with pytest.raises(ConfigError):
            validate_a_values([bad])


class TestValidateX:
    """Tests for validate_x_values function"""

    def test_zero_allowed(self):
        assert validate_x_values([0.0, 2.0]) == [0.0, 2.0]

    def test_positive(self):
        """positive=True excludes 0"""
        with pytest.raises(ConfigError):
            validate_x_values([0.0, 1.0], positive=True)

    @pytest.mark.parametrize("bad", [-1.0, float("inf"), float("nan")])
    def test_invalid(self, bad):
        with pytest.raises(ConfigError):
            validate_x_values([bad])

    def test_empty(self):
        with pytest.raises(ConfigError):
            validate_x_values([])


class TestMisc:
    """delta, function ids and formats"""

    def test_delta(self):
        validate_delta(0.1)
        with pytest.raises(ConfigError):
            validate_delta(0.0)

    def test_known_functions(self):
        """All unknown ids are listed at once"""
        catalog = Catalog()
        assert ensure_known_functions(catalog, ["t", "sin"]) == ["t", "sin"]
        with pytest.raises(ConfigError) as exc:
            ensure_known_functions(catalog, ["foo", "t", "bar"])
        assert "bar" in exc.value.detail and "foo" in exc.value.detail

    def test_format(self):
        """Formats are case-insensitive; pdf is not a report format"""
        assert coerce_format(" XLSX ") == "xlsx"
        assert coerce_format("") == "csv"
        with pytest.raises(ConfigError):
            coerce_format("pdf")
