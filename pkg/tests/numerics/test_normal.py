import math

import numpy as np
import pytest
from scipy.special import ndtr, ndtri

from creditvar.numerics.normal import (
    NormalDomainError, std_normal_cdf, std_normal_inv_cdf, std_normal_pdf
)


class TestNormalCdf():
    """Class to test the standard normal density and distribution function."""

    def test_pdf_at_zero(self):
        """Test that the density at zero is 1/sqrt(2 pi)."""
        assert std_normal_pdf(0.0) == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), rel=1e-15)

    def test_pdf_underflows_to_zero(self):
        """Test that the density far in the tails underflows without raising."""
        assert std_normal_pdf(60.0) == 0.0
        assert std_normal_pdf(-60.0) == 0.0

    def test_pdf_far_tail(self):
        """Test the density at 10 standard deviations."""
        assert std_normal_pdf(10.0) == pytest.approx(7.69459862670642e-23, rel=1e-12)

    def test_cdf_derivative_is_pdf(self):
        """Test that a central difference of the distribution function gives the density."""
        h = 1e-5
        x = np.linspace(-5.0, 5.0, 1001)
        central = (std_normal_cdf(x + h) - std_normal_cdf(x - h)) / (2.0 * h)
        assert np.max(np.abs(central - std_normal_pdf(x))) < 1e-8

    def test_cdf_known_values(self):
        """Test the distribution function at known quantiles."""
        assert std_normal_cdf(0.0) == 0.5
        assert std_normal_cdf(1.959963984540054) == pytest.approx(0.975, abs=1e-14)
        assert std_normal_cdf(-1.0) == pytest.approx(0.15865525393145707, rel=1e-13)

    def test_cdf_infinite_limits(self):
        """Test that infinite arguments map to 0 and 1."""
        assert std_normal_cdf(-np.inf) == 0.0
        assert std_normal_cdf(np.inf) == 1.0

    def test_cdf_deep_tail(self):
        """Test the lower tail keeps relative precision at -8."""
        assert std_normal_cdf(-8.0) == pytest.approx(6.220960574271785e-16, rel=1e-3)
        assert std_normal_cdf(-30.0) > 0.0

    def test_cdf_symmetry(self):
        """Test that cdf(x) + cdf(-x) = 1."""
        x = np.linspace(-8.0, 8.0, 161)
        np.testing.assert_allclose(std_normal_cdf(x) + std_normal_cdf(-x), 1.0, atol=1e-15)

    def test_cdf_matches_scipy(self):
        """Test the distribution function against scipy's ndtr."""
        x = np.linspace(-12.0, 12.0, 481)
        np.testing.assert_allclose(std_normal_cdf(x), ndtr(x), rtol=1e-13, atol=1e-300)

    def test_scalar_and_array_types(self):
        """Test that scalars give floats and arrays give arrays of the same shape."""
        assert isinstance(std_normal_cdf(0.3), float)
        assert isinstance(std_normal_pdf(0.3), float)
        values = std_normal_cdf(np.zeros((2, 3)))
        assert values.shape == (2, 3)


class TestNormalInvCdf():
    """Class to test the standard normal quantile function."""

    def test_median(self):
        """Test that the quantile at one half is zero."""
        assert abs(std_normal_inv_cdf(0.5)) < 1e-15

    def test_known_values(self):
        """Test the quantile function at familiar confidence levels."""
        assert std_normal_inv_cdf(0.975) == pytest.approx(1.959963984540054, abs=1e-12)
        assert std_normal_inv_cdf(0.9975) == pytest.approx(2.807033768343811, abs=1e-11)
        assert std_normal_inv_cdf(0.015) == pytest.approx(-2.1700903775845606, abs=1e-11)

    def test_matches_scipy(self):
        """Test the quantile function against scipy's ndtri across both tails."""
        p = np.concatenate([np.logspace(-300, -1, 150), np.linspace(0.1, 0.9, 81)])
        np.testing.assert_allclose(std_normal_inv_cdf(p), ndtri(p), rtol=1e-12)

    def test_strictly_increasing(self):
        """Test that the quantile function is strictly increasing across (0, 1)."""
        p = np.linspace(1e-10, 1.0 - 1e-10, 10000)
        assert np.all(np.diff(std_normal_inv_cdf(p)) > 0.0)

    def test_antisymmetry(self):
        """Test that inv_cdf(1 - p) = -inv_cdf(p)."""
        p = np.array([1e-10, 1e-4, 0.01, 0.2, 0.45])
        np.testing.assert_allclose(std_normal_inv_cdf(1.0 - p), -std_normal_inv_cdf(p),
                                   rtol=1e-6)

    def test_round_trip(self):
        """Test that inv_cdf(cdf(x)) recovers x on |x| <= 6."""
        x = np.linspace(-6.0, 6.0, 241)
        assert np.max(np.abs(std_normal_inv_cdf(std_normal_cdf(x)) - x)) < 1e-8

    def test_round_trip_lower_tail(self):
        """Test that the lower tail round trip is accurate far beyond the central range."""
        x = np.linspace(-37.0, 0.0, 149)
        np.testing.assert_allclose(std_normal_inv_cdf(std_normal_cdf(x)), x,
                                   rtol=1e-12, atol=1e-14)

    def test_unrefined_accuracy(self):
        """Test that the unrefined rational approximation alone is accurate."""
        p = np.linspace(1e-6, 1.0 - 1e-6, 1001)
        np.testing.assert_allclose(std_normal_inv_cdf(p, refine=False), ndtri(p),
                                   rtol=1e-12, atol=1e-13)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, float('nan')])
    def test_domain_error(self, p):
        """Test that probabilities outside (0, 1) raise NormalDomainError."""
        with pytest.raises(NormalDomainError) as excinfo:
            std_normal_inv_cdf(p)
        assert "must lie in (0, 1)" in str(excinfo.value)

    def test_domain_error_in_array(self):
        """Test that a single bad entry in an array raises."""
        with pytest.raises(NormalDomainError):
            std_normal_inv_cdf(np.array([0.1, 0.5, 1.0]))

    def test_domain_error_is_value_error(self):
        """Test that the domain error can be caught as a ValueError."""
        with pytest.raises(ValueError):
            std_normal_inv_cdf(0.0)
