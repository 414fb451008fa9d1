from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nlse_locality.nonlinearity import (
    DensityFloorError,
    DoebnerGoldin,
    FloorStats,
    Logarithmic,
    NoNonlinearity,
    evaluate_R,
    from_config,
    is_galilei_covariant,
    is_linearizable,
    is_real_valued,
    to_config,
)
from nlse_locality.simulator import ClosedForm, Grid2D, WaveField


@given(st.fractions(min_value=-5, max_value=5, max_denominator=12))
def test_gauge_family_is_linearizable_and_galilei(D):
    f = DoebnerGoldin.gauge_generated(D)
    assert is_galilei_covariant(f)
    assert is_linearizable(f) == (D if D != 0 else 0)


def test_linearizable_rejects_other_tuples():
    assert is_linearizable(DoebnerGoldin(1, (1, -1, 1, -1, 0.5))) is None
    assert is_linearizable(Logarithmic(0.1)) is None
    assert is_linearizable(NoNonlinearity()) == 0


def test_galilei_condition():
    assert is_galilei_covariant(DoebnerGoldin(1, (1, 0.3, 0, -1, 0.7)))
    assert not is_galilei_covariant(DoebnerGoldin(1, (1, 0, 1, -1, 0)))
    assert not is_galilei_covariant(DoebnerGoldin(1, (1, 0, 0, 0, 0)))


def test_reality():
    assert is_real_valued(Logarithmic(2)).is_real
    dg = is_real_valued(DoebnerGoldin(1, (0, 0, 0, 0, 0)))
    # Im R = D Lap rho / rho survives even with all c_j = 0
    assert not dg.is_real and dg.witness is not None


def test_config_round_trip():
    for f in (NoNonlinearity(), Logarithmic(0.1), DoebnerGoldin(1.0, (1.0, -1.0, 0.0, -1.0, 0.5))):
        assert from_config(to_config(f)) == f
    with pytest.raises(ValueError):
        from_config({"type": "cubic"})
    with pytest.raises(ValueError):
        DoebnerGoldin(1, (1, 2, 3))


def test_logarithmic_on_gaussian():
    g = Grid2D(64, 8.0)
    psi = ClosedForm("exp(-x^2 - y^2)", normalize=False).sample(g)
    R = evaluate_R(Logarithmic(0.5), psi, floor=1e-300)
    X, Y = g.mesh
    # -b ln rho = -b * (-2 x^2 - 2 y^2)
    assert np.allclose(R.real, 0.5 * 2 * (X**2 + Y**2), atol=1e-12)
    assert np.all(R.imag == 0)


def test_dg_imaginary_part_is_lap_rho_over_rho():
    g = Grid2D(64, 8.0)
    psi = ClosedForm("exp(-x^2/2 - y^2/2)", normalize=False).sample(g)
    D = 0.7
    R = evaluate_R(DoebnerGoldin(D, (0, 0, 0, 0, 0)), psi, floor=1e-20)
    X, Y = g.mesh
    # rho = exp(-x^2 - y^2): Lap rho / rho = 4 (x^2 + y^2) - 4; Im R = D Lap rho / rho
    inner = X**2 + Y**2 < 9
    assert np.allclose(R.imag[inner], D * (4 * (X**2 + Y**2) - 4)[inner], atol=1e-8)


def test_floor_handling():
    g = Grid2D(32, 8.0)
    psi = np.ones((32, 32), dtype=complex)
    psi[3, 4] = 0
    field = WaveField(psi, g)
    stats = FloorStats()
    R = evaluate_R(Logarithmic(1), field, stats=stats)
    assert stats.points == 1 and np.isfinite(R).all()
    with pytest.raises(DensityFloorError) as err:
        evaluate_R(Logarithmic(1), field, strict=True)
    assert err.value.index == (3, 4)
