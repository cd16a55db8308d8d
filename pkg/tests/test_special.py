import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from emdrisk.exceptions import DomainError
from emdrisk.special import digamma, inverse_digamma, inverse_trigamma, tetragamma, trigamma

EULER = 0.57721566490153286061


class TestDigamma:
    def test_at_one(self):
        assert digamma(1.0) == pytest.approx(-EULER, abs=1e-15)

    def test_recurrence(self):
        assert digamma(2.0) == pytest.approx(digamma(1.0) + 1.0, abs=1e-15)

    def test_half(self):
        assert digamma(0.5) == pytest.approx(-EULER - 2 * math.log(2), abs=1e-14)

    @pytest.mark.parametrize("x", [0.0, -1.0, -0.5, float("nan")])
    def test_domain(self, x):
        with pytest.raises(DomainError, match="domain error"):
            digamma(x)

    def test_array_shape(self):
        x = np.array([[0.5, 1.0], [2.0, 30.0]])
        out = digamma(x)
        assert out.shape == (2, 2)
        assert out[0, 1] == pytest.approx(-EULER, abs=1e-15)

    @given(st.floats(1e-3, 1e5))
    def test_recurrence_property(self, x):
        assert digamma(x + 1) - digamma(x) == pytest.approx(1 / x, rel=1e-12, abs=1e-12)


class TestTrigamma:
    def test_at_one(self):
        assert trigamma(1.0) == pytest.approx(math.pi**2 / 6, rel=1e-15)

    def test_recurrence(self):
        assert trigamma(2.0) == pytest.approx(math.pi**2 / 6 - 1, rel=1e-14)

    def test_half(self):
        assert trigamma(0.5) == pytest.approx(math.pi**2 / 2, rel=1e-15)

    def test_domain(self):
        with pytest.raises(DomainError, match="domain error"):
            trigamma(-2.0)

    @given(st.floats(1e-3, 1e6))
    def test_positive(self, x):
        assert trigamma(x) > 0


def test_tetragamma_matches_derivative():
    x = np.array([0.01, 0.7, 3.0, 25.0, 1e4])
    h = 1e-6 * x
    fd = (trigamma(x + h) - trigamma(x - h)) / (2 * h)
    np.testing.assert_allclose(tetragamma(x), fd, rtol=1e-6)


def test_tetragamma_at_one():
    # psi_2(1) = -2 zeta(3)
    assert tetragamma(1.0) == pytest.approx(-2 * 1.2020569031595942, rel=1e-14)


def test_inverses():
    x = np.array([1e-4, 0.3, 1.0, 17.0, 1e8])
    np.testing.assert_allclose(inverse_trigamma(trigamma(x)), x, rtol=1e-12)
    np.testing.assert_allclose(inverse_digamma(digamma(x)), x, rtol=1e-12)


def test_scalar_returns_float():
    assert isinstance(digamma(3.0), float)
    assert isinstance(trigamma(np.float64(3.0)), float)
