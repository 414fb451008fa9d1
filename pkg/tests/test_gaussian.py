from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from nlse_locality.gaussian import (
    ExactClassError,
    ExactScalar,
    QuadraticForm2,
    gaussian_moment,
    integrate_specialized,
    wick_moment,
)
from nlse_locality.symbolic import parse_expression

from oracles import gaussian_integral


def test_appendix_normalization():
    # int exp(-2(x^2 + y^2 + xy)) = pi / sqrt(3)
    assert str(integrate_specialized(parse_expression("exp(-2*x^2 - 2*y^2 - 2*x*y)"))) == "1/3*pi*sqrt(3)"


def test_isserlis_fourth_moment():
    cov = [[Fraction(2), Fraction(1, 2)], [Fraction(1, 2), Fraction(3)]]
    # E[x^2 y^2] = s11 s22 + 2 s12^2
    assert wick_moment(cov, (2, 2)) == 2 * 3 + 2 * Fraction(1, 4)
    assert wick_moment(cov, (3, 0)) == 0
    assert wick_moment(cov, (4, 0)) == 3 * 4


@settings(max_examples=25, deadline=None)
@given(
    st.integers(1, 6), st.integers(1, 6), st.integers(-3, 3),
    st.integers(0, 4), st.integers(0, 4),
)
def test_moment_against_quadrature(m11, m22, m12, a, b):
    if m11 * m22 <= m12 * m12:
        return
    M = QuadraticForm2(m11, m12, m22)
    exact = float(gaussian_moment(M, (a, b)))
    ref = gaussian_integral({(a, b): 1.0}, [[m11, m12], [m12, m22]])
    assert exact == pytest.approx(ref, rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("text", ["-32/3*pi*sqrt(3)", "1/3*pi", "32", "0", "5/7*sqrt(2)"])
def test_exact_scalar_round_trip(text):
    assert str(ExactScalar.parse(text)) == text


def test_exact_scalar_canonical_radicand():
    assert str(ExactScalar(Fraction(1), 1, Fraction(1, 3))) == "1/3*pi*sqrt(3)"
    assert str(ExactScalar(2, 0, 12)) == "4*sqrt(3)"


def test_mixed_classes_refuse_to_add():
    with pytest.raises(ExactClassError):
        ExactScalar(1, 1) + ExactScalar(1, 0, 2)


def test_not_positive_definite():
    with pytest.raises(ValueError):
        QuadraticForm2(1, 2, 1)
