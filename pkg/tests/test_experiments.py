import numpy as np
import pytest

from nlse_locality.nonlinearity import DoebnerGoldin, Logarithmic
from nlse_locality.report import SignalReport
from nlse_locality.simulator import (
    BoxMarginError,
    ClosedForm,
    Grid2D,
    Harmonic2,
    Observable,
    SimConfig,
    identical_particle_experiment,
    lambda_sensitivity,
    x0_independence_check,
)

from oracles import region_cross_term

GRID = Grid2D(64, 8.0)
F = "exp(-x^2 - y^2)"


def _signal(R, n, obs=None):
    cfg = SimConfig(GRID, 1e-3, nonlinearity=R) if R is not None else SimConfig(GRID, 1e-3)
    return lambda_sensitivity(cfg, obs or Observable("x1^2"), n, sample_every=20)


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_linear_dynamics_give_no_signal(n):
    rep = _signal(None, n)
    assert rep.status == "zero" and rep.provenance == "numeric"


def test_zero_coupling_matches_linear():
    a, b = _signal(None, 2), _signal(Logarithmic(0), 2)
    assert a.value == b.value and a.error == b.error


def test_logarithmic_n3_within_error_bar():
    # the Gaussian ODE gives exactly 0 below n = 6 for this initial state
    rep = _signal(Logarithmic(0.1), 3)
    assert abs(rep.value) <= rep.error


def test_fourier_observable_null():
    rep = _signal(None, 1, Observable("fourier", k=np.pi / 8.0))
    assert rep.status == "zero"


def test_argument_checks():
    cfg = SimConfig(GRID, 1e-3)
    with pytest.raises(ValueError):
        lambda_sensitivity(cfg, Observable("x1^2"), 2, sample_every=15)
    with pytest.raises(ValueError):
        lambda_sensitivity(cfg, Observable("x1^2"), 5)
    with pytest.raises(ValueError):
        lambda_sensitivity(cfg, Observable("x1^2"), 1, delta=0.0)
    with pytest.raises(ValueError):
        lambda_sensitivity(cfg, Observable("fourier", k=1.0), 1)


def test_undecayed_initial_data_rejected():
    cfg = SimConfig(GRID, 1e-3, ClosedForm("exp(-x^2/30 - y^2/30)"))
    with pytest.raises(BoxMarginError):
        lambda_sensitivity(cfg, Observable("x1^2"), 1)


def test_signal_report_status():
    assert SignalReport("test2", 2, 1.0, "numeric", error=0.4).status == "resolved"
    assert SignalReport("test2", 2, 1.0, "numeric", error=0.6).inconclusive
    assert SignalReport("test2", 2, 0.1, "numeric", error=0.2).status == "zero"
    with pytest.raises(ValueError):
        SignalReport("test2", 2, 1.0, "numeric")
    with pytest.raises(ValueError):
        SignalReport("test9", 2, 1.0, "numeric", error=0.1)


# ---------------------------------------------------------------- translation

def test_x0_shift_leaves_marginal_unchanged():
    cfg = SimConfig(GRID, 1e-3, ClosedForm("exp(-x^2 - y^2 - x*y)"), Harmonic2(1.0), DoebnerGoldin.gauge_generated(0.2))
    rep = x0_independence_check(cfg, [0.5, -1.0], steps=200)
    assert rep.linear and rep.passed() and len(rep.rows) == 2


def test_x0_shift_margin():
    cfg = SimConfig(GRID, 1e-3)
    with pytest.raises(BoxMarginError):
        x0_independence_check(cfg, [7.5], steps=10)


# ---------------------------------------------------------- identical particles

@pytest.fixture(scope="module")
def identical():
    return {
        s: identical_particle_experiment(F, [1.0, 2.0], sigma=s, grid=GRID, dt=1e-3, sample_every=10)
        for s in (1, -1)
    }


def test_cross_term_matches_quadrature(identical):
    row = identical[1].rows[1]
    ref = region_cross_term(lambda x, y: np.exp(-x * x - y * y), 2.0, (-2.0, 2.0))
    assert row.cross == pytest.approx(ref, rel=5e-4)  # h = 0.25 here
    assert row.overlap == pytest.approx(row.cross, rel=1e-12)


def test_sigma_negates_cross_term(identical):
    for a, b in zip(identical[1].rows, identical[-1].rows):
        assert a.cross == -b.cross


def test_overlap_decreases_with_distance(identical):
    assert identical[1].overlaps_decreasing()


def test_parts_agree_and_signal_is_resolved(identical):
    rep = identical[1]
    assert rep.chi_phi_agree()
    near = rep.rows[1].signals
    assert all(near[p].status == "resolved" for p in ("full", "chi", "phi"))
    assert near["chi"].params["part"] == "chi" and near["chi"].params["d"] == 2.0


def test_interval_must_fit():
    with pytest.raises(BoxMarginError):
        identical_particle_experiment(F, [2.0], interval=(-9.0, 0.0), grid=GRID, signals=False)
