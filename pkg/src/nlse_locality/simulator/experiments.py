"""Lambda-sensitivity measurements, translation check and the identical-particle harness."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..nonlinearity import DEFAULT_FLOOR, Logarithmic, NoNonlinearity, RFunctional, is_linearizable
from ..report import SignalReport
from .splitstep import evolve
from .grid import Grid2D, WaveField
from .observables import Observable, cross_term, marginal_density, moment
from .specs import BoxMarginError, ClosedForm, Displaced, Harmonic2, InitialSpec, PotentialSpec, SymmetrizedPair
from .stencils import fornberg_weights, samples_needed

EDGE_TOL = 1e-12
# measured per-sample noise of a lambda-paired moment difference is ~0.5 eps |M|;
# the rounding bar is 4 sigma of the Richardson series (noise gain ~1.9/delta)
_NOISE = 8 * np.finfo(float).eps


@dataclass(frozen=True)
class SimConfig:
    grid: Grid2D = field(default_factory=Grid2D)
    dt: float = 1e-4
    initial: InitialSpec = field(default_factory=lambda: ClosedForm("exp(-x^2 - y^2 - x*y)"))
    potential: PotentialSpec = field(default_factory=lambda: Harmonic2(1.0))
    nonlinearity: RFunctional = field(default_factory=NoNonlinearity)
    floor: float = DEFAULT_FLOOR
    strict: bool = False

    def initial_field(self) -> WaveField:
        psi = self.initial.sample(self.grid)
        if psi.edge_amplitude() > EDGE_TOL:
            raise BoxMarginError(
                f"initial data does not decay at the box edge (relative amplitude {psi.edge_amplitude():.2e})"
            )
        return psi

    def run(self, steps: int, sample_every: int, psi0: Optional[WaveField] = None, potential=None):
        return evolve(
            psi0 if psi0 is not None else self.initial_field(),
            potential if potential is not None else self.potential,
            self.nonlinearity,
            dt=self.dt,
            steps=steps,
            sample_every=sample_every,
            floor=self.floor,
            strict=self.strict,
        )


def _series(cfg: SimConfig, lam: float, obs: Observable, steps: int, every: int, psi0: WaveField) -> np.ndarray:
    traj = cfg.run(steps, every, psi0, cfg.potential.with_lambda(lam))
    return np.array([moment(w, obs).real for w in traj.samples])


def _stencil(n: int, m: int) -> np.ndarray:
    return np.array([float(v) for v in fornberg_weights(tuple(range(m)), n)])


def lambda_sensitivity(
    cfg: SimConfig,
    obs: Observable,
    n: int,
    delta: float = 1e-2,
    sample_every: int = 10,
    test: str = "test2",
) -> SignalReport:
    """``d_lambda d_t^n <obs>`` at ``t = 0`` from paired runs at ``lambda +- delta`` and ``+- delta/2``.

    The lambda difference is Richardson-extrapolated; the time derivative uses
    the one-sided stencil on the first ``2n + 2`` samples.  The error bar adds
    the lambda extrapolation gap, the stencil truncation (one extra sample)
    and a rounding floor.
    """
    if not 0 <= n <= 4:
        raise ValueError("raw differencing supports 0 <= n <= 4")
    if not delta > 0:
        raise ValueError("delta must be positive")
    if sample_every < 2 or sample_every % 2:
        raise ValueError("sample_every must be even (the half spacing is sampled too)")
    obs.check(cfg.grid.L)
    lam0 = cfg.potential.lam
    m = samples_needed(n)
    steps = m * sample_every
    H = cfg.dt * sample_every
    psi0 = cfg.initial_field()
    half = sample_every // 2
    M = {s: _series(cfg, lam0 + s, obs, steps, half, psi0) for s in (delta, -delta, delta / 2, -delta / 2)}
    coarse = (M[delta] - M[-delta]) / (2 * delta)
    fine = (M[delta / 2] - M[-delta / 2]) / delta
    rich = (4 * fine - coarse) / 3  # spacing H/2, 2m + 1 samples

    w, w_more = _stencil(n, m), _stencil(n, m + 1)
    scale = H**n
    value = float(w @ rich[::2][:m]) / scale
    # truncation: one more sample, and the same stencil at half spacing
    more = float(w_more @ rich[::2]) / scale
    halved = float(w @ rich[:m]) / (scale / 2**n)
    truncation = max(abs(more - value), abs(halved - value))
    lam_gap = abs(float(w @ (fine - coarse)[::2][:m])) / (3 * scale)
    mag = max(float(np.abs(np.stack(list(M.values()))).max()), 1e-300)
    rounding = _NOISE * mag / delta * float(np.linalg.norm(w_more)) / scale
    params = {"lambda": lam0, "delta": delta, "dt": cfg.dt, "sample_every": sample_every, "weight": obs.weight}
    if obs.weight == "region":
        params["interval"] = list(obs.interval)
    return SignalReport(
        test,
        n,
        value,
        "numeric",
        k=obs.k,
        params=params,
        error=float(truncation + lam_gap + rounding),
    )


# ------------------------------------------------------------- translation

@dataclass(frozen=True)
class ShiftRow:
    shift: float
    deviation_t0: float
    deviation_t: float


@dataclass(frozen=True)
class X0Report:
    t: float
    rows: List[ShiftRow]
    linear: bool  # linear or linearizable dynamics; tolerance 1e-6 applies

    @property
    def max_deviation(self) -> float:
        return max((max(r.deviation_t0, r.deviation_t) for r in self.rows), default=0.0)

    def passed(self, tol_t0: float = 1e-8, tol_t: float = 1e-6) -> bool:
        return all(r.deviation_t0 <= tol_t0 and r.deviation_t <= tol_t for r in self.rows)


def x0_independence_check(cfg: SimConfig, shifts: Sequence[float], steps: int = 1000, margin: float = 1.0) -> X0Report:
    """Co-translate the harmonic centre and the second argument of the initial data; compare ``rho_1``.

    Shifts that push the shifted data within ``margin`` of the box edge (or
    leave it undecayed there) raise ``BoxMarginError``.
    """
    if not isinstance(cfg.potential, Harmonic2):
        raise ValueError("x0 independence is defined for the harmonic potential on particle 2")
    if not isinstance(cfg.initial, ClosedForm):
        raise ValueError("x0 independence needs closed-form initial data")
    L = cfg.grid.L
    for s in shifts:
        if abs(cfg.potential.x0 + s) > L - margin:
            raise BoxMarginError(f"shifted centre {cfg.potential.x0 + s} is within {margin} of the box edge")

    def run(s):
        shifted = replace(cfg, initial=replace(cfg.initial, shift=cfg.initial.shift + s),
                          potential=replace(cfg.potential, x0=cfg.potential.x0 + s))
        psi0 = shifted.initial_field()
        traj = shifted.run(steps, steps, psi0)
        return marginal_density(traj.samples[0]), marginal_density(traj.samples[-1])

    ref0, ref = run(0.0)
    rows = []
    for s in shifts:
        r0, r = run(s)
        rows.append(ShiftRow(float(s), float(np.max(np.abs(r0 - ref0))), float(np.max(np.abs(r - ref)))))
    linear = is_linearizable(cfg.nonlinearity) is not None
    return X0Report(steps * cfg.dt, rows, linear)


# ------------------------------------------------------- identical particles

@dataclass(frozen=True)
class IdenticalRow:
    d: float
    sigma: int
    overlap: float  # int_G (|Psi|^2 - |chi|^2 - |phi|^2) at t = 0
    cross: float  # sigma 2 Re int_G conj(chi) phi
    signals: Dict[str, SignalReport]

    def to_row(self) -> dict:
        return {
            "d": self.d,
            "sigma": self.sigma,
            "overlap": self.overlap,
            "cross": self.cross,
            "signals": {k: v.to_row() for k, v in sorted(self.signals.items())},
        }


@dataclass(frozen=True)
class IdenticalReport:
    f: str
    interval: Tuple[float, float]
    n: int
    rows: List[IdenticalRow]

    def overlaps_decreasing(self) -> bool:
        # the cross-term form has no cancellation; the subtracted overlap hits rounding near 1e-17
        mags = [abs(r.cross) for r in sorted(self.rows, key=lambda r: r.d)]
        return all(a > b for a, b in zip(mags, mags[1:]))

    def chi_phi_agree(self) -> bool:
        for r in self.rows:
            c, p = r.signals.get("chi"), r.signals.get("phi")
            if c is not None and p is not None and abs(c.value - p.value) > c.error + p.error:
                return False
        return True


def identical_particle_experiment(
    f: str,
    d_list: Sequence[float],
    sigma: int = 1,
    n: int = 2,
    interval: Tuple[float, float] = (-2.0, 2.0),
    b: float = 0.1,
    lam: float = 1.0,
    width: float = 1.0,
    grid: Optional[Grid2D] = None,
    dt: float = 1e-4,
    delta: float = 1e-2,
    sample_every: int = 10,
    parts: Sequence[str] = ("full", "chi", "phi"),
    signals: bool = True,
) -> IdenticalReport:
    """Per ``d``: t = 0 exchange cross term on ``G`` and lambda-sensitivities of ``P(G)``.

    ``Psi = f(x, y-d) + sigma f(y, x-d)`` and its two parts evolve under
    ``lam (bump(y-d) + bump(x-d))`` with the logarithmic nonlinearity.
    """
    grid = grid or Grid2D()
    lo, hi = interval
    if not (-grid.L < lo < hi < grid.L):
        raise BoxMarginError("interval O must lie inside the box")
    obs = Observable("region", interval=(float(lo), float(hi)))
    rows = []
    for d in d_list:
        pot = Displaced(lam, float(d), width)
        pot.check(grid)
        pair = SymmetrizedPair(f, float(d), sigma)
        fields = {p: pair.with_part(p).sample(grid) for p in ("full", "chi", "phi")}
        for p, w in fields.items():
            if w.edge_amplitude() > EDGE_TOL:
                raise BoxMarginError(f"part {p} at d={d} does not decay at the box edge")
        g = obs.interval
        overlap = float(
            (moment(fields["full"], obs) - moment(fields["chi"], obs) - moment(fields["phi"], obs)).real
        )
        cross = cross_term(fields["chi"], fields["phi"], g, sigma)
        reports = {}
        if signals:
            for p in parts:
                cfg = SimConfig(grid, dt, pair.with_part(p), pot, Logarithmic(b))
                rep = lambda_sensitivity(cfg, obs, n, delta, sample_every, test="test2")
                reports[p] = replace(rep, params={**rep.params, "d": float(d), "part": p, "sigma": sigma, "b": b})
        rows.append(IdenticalRow(float(d), sigma, overlap, cross, reports))
    return IdenticalReport(f, (float(lo), float(hi)), n, rows)


__all__ = [
    "IdenticalReport",
    "IdenticalRow",
    "ShiftRow",
    "SimConfig",
    "X0Report",
    "identical_particle_experiment",
    "lambda_sensitivity",
    "x0_independence_check",
]
