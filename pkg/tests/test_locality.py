from fractions import Fraction

import pytest
import sympy
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from nlse_locality.gaussian import ExactScalar
from nlse_locality.locality.appendix import LAMBDA, appendix_signal, build_term0, idot_iterate, specialize
from nlse_locality.locality.hierarchy import (
    TD,
    coefficient,
    i_ddt,
    iterate_T,
    t_recurrence_rhs,
    x2_moment_identity,
)
from nlse_locality.locality.werner import (
    DEFAULT_C0,
    AnsatzNotClosedError,
    GaussianState,
    derive_gaussian_ode,
    moment_derivative,
    werner_test,
)
from nlse_locality.nonlinearity import DoebnerGoldin, Logarithmic, NoNonlinearity
from nlse_locality.symbolic import serialize

x, y = sympy.symbols("x y", real=True)


def _sympy(poly):
    return parse_expr(serialize(poly.to_expr()), local_dict={"x": x, "y": y, "exp": sympy.exp},
                      transformations=standard_transformations + (convert_xor,))


# ----------------------------------------------------------------- hierarchy

def test_recurrence_general_nu():
    assert str(t_recurrence_rhs(2)) == "Poly(-k^2*T[k,2] + 2*k*I*T[k,3] + 2*D[k,1,1] + D[k,2,0])"


def test_iteration_is_linear_in_symbols():
    with pytest.raises(ValueError):
        i_ddt(iterate_T(1) * iterate_T(1))


def test_x2_identity_general_term():
    full = x2_moment_identity(general=True)
    assert str(coefficient(full, TD("D", 1, 0, 1, 1, True))) == "Poly(4*I)"
    assert str(x2_moment_identity(n=2)) == "Poly(16*I*dt^2 D[0,1,1] + 8*I*dt^2 D[0,2,0])"


# ------------------------------------------------------------------ appendix

def test_appendix_against_sympy():
    term = idot_iterate(build_term0(Logarithmic(1)).integrand, 3)
    integrand = _sympy(specialize(term).diff(LAMBDA))
    raw = sympy.integrate(integrand, (x, -sympy.oo, sympy.oo), (y, -sympy.oo, sympy.oo))
    assert sympy.simplify(raw + sympy.Rational(32, 3) * sympy.pi * sympy.sqrt(3)) == 0
    norm = sympy.integrate(sympy.exp(-2 * x**2 - 2 * y**2 - 2 * x * y), (x, -sympy.oo, sympy.oo), (y, -sympy.oo, sympy.oo))
    assert sympy.simplify(norm - sympy.pi * sympy.sqrt(3) / 3) == 0


def test_appendix_zero_for_linear_theory():
    assert build_term0(NoNonlinearity()).integrand.is_zero()


def test_appendix_scales_with_b():
    for b in (Fraction(1, 2), Fraction(-3), 0.25):
        assert appendix_signal(Logarithmic(b)).signal == ExactScalar(32) * ExactScalar(Fraction(str(b)))


def test_appendix_agrees_with_gaussian_ode():
    # d_lambda d_t^6 <x1^2> = 8 b raw / norm = -256 b, from an unrelated pipeline
    rep = werner_test(Logarithmic(1), n=6)
    assert rep.value == pytest.approx(-256, abs=1e-20)
    res = appendix_signal()
    assert res.raw / res.norm * ExactScalar(8) == ExactScalar(-256)


# -------------------------------------------------------------------- werner

def test_free_riccati():
    ode = derive_gaussian_ode(NoNonlinearity())
    assert ode.residual.is_zero()
    assert str(ode.rhs["C11"]) == "Poly(-2*C11^2*I - 2*C12^2*I)"
    assert str(ode.rhs["C22"]) == "Poly(-2*C12^2*I - 2*C22^2*I + 2*lambda*I)"


@pytest.mark.parametrize("f", [Logarithmic(0.3), DoebnerGoldin(1, (1, -1, 1, -1, 0.5))])
def test_ansatz_closes(f):
    assert derive_gaussian_ode(f).residual.is_zero()


def test_free_width_matches_closed_form():
    state = GaussianState.normalized(DEFAULT_C0)
    d0 = moment_derivative(NoNonlinearity(), state, 0.0, 0)
    d2 = moment_derivative(NoNonlinearity(), state, 0.0, 2)
    # |Psi|^2 has covariance (2 Re C)^-1, so <x1^2> = 1/3; free motion with velocity 2p gives 8 <p1^2> = 4 C11
    assert float(d0) == pytest.approx(1 / 3, rel=1e-30)
    assert float(d2) == pytest.approx(8, rel=1e-30)


def test_galilei_tuples_blind_to_lambda():
    for f in (DoebnerGoldin.gauge_generated(1), DoebnerGoldin(1, (1, 0.3, 0, -1, 0.7))):
        for n in range(7):
            assert abs(werner_test(f, n=n).value) < 1e-30


def test_c3_tuple_first_signal_order_four():
    f = DoebnerGoldin(1, (1, -1, 1, -1, 0.5))
    assert abs(werner_test(f, n=3).value) < 1e-30
    assert werner_test(f, n=4).value == pytest.approx(-1280 / 3, rel=1e-12)


def test_c3_tuple_complex_c0_signal_at_three():
    C0 = [[2, 1 + 0.5j], [1 + 0.5j, 2]]
    assert werner_test(DoebnerGoldin(1, (1, -1, 1, -1, 0.5)), C0, 3).value == pytest.approx(8 / 3, rel=1e-12)
    assert abs(werner_test(DoebnerGoldin(1, (1, 0.3, 0, -1, 0.7)), C0, 3).value) < 1e-30


def test_first_moment_vanishes():
    assert werner_test(Logarithmic(1), n=3, test="test3").value == 0


def test_werner_rejects_bad_order():
    with pytest.raises(ValueError):
        werner_test(Logarithmic(1), n=7)
