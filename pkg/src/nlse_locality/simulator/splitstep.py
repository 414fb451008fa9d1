"""Strang split-step evolution of ``i dPsi/dt = (-Lap + V + R[Psi]) Psi`` on the periodic box."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..nonlinearity import (
    DEFAULT_FLOOR,
    DoebnerGoldin,
    FloorStats,
    NoNonlinearity,
    RFunctional,
    DensityFloorError,
    doebner_goldin_on_support,
    evaluate_R,
)
from .grid import WaveField, fft2, ifft2
from .specs import NoPotential, PotentialSpec

DRIFT_PER_1000 = 1e-6


class NumericalGuardError(RuntimeError):
    """Norm drift beyond tolerance; carries the step where it tripped."""

    def __init__(self, step: int, t: float, drift: float, limit: float):
        super().__init__(f"norm drift {drift:.3e} exceeds {limit:.3e} at step {step} (t={t:.6g})")
        self.step = step
        self.t = t
        self.drift = drift


@dataclass
class Trajectory:
    samples: List[WaveField]
    norms: np.ndarray  # norm^2 after every step, index 0 = initial
    floor: FloorStats = field(default_factory=FloorStats)

    @property
    def times(self) -> np.ndarray:
        return np.array([w.t for w in self.samples])

    def max_drift(self) -> float:
        return float(np.max(np.abs(self.norms - self.norms[0])) / self.norms[0])


def check_step(dt: float, k_max: float) -> None:
    # exp(-i k^2 dt) must resolve the fastest mode: dt k_max^2 <= pi
    if not dt > 0:
        raise ValueError("dt must be positive")
    if dt * k_max**2 > math.pi:
        raise ValueError(f"dt={dt} violates dt*k_max^2 <= pi (k_max={k_max:.4g})")


def evolve(
    psi0: WaveField,
    potential: Optional[PotentialSpec] = None,
    R: Optional[RFunctional] = None,
    dt: float = 1e-4,
    steps: int = 1000,
    sample_every: Optional[int] = None,
    floor: float = DEFAULT_FLOOR,
    strict: bool = False,
    guard: bool = True,
) -> Trajectory:
    """Second-order Strang splitting; returns snapshots every ``sample_every`` steps.

    Phase half-steps use ``V + R`` evaluated on the current field; for
    nonlinearities that also depend on the phase (Doebner-Goldin) each half
    step is corrected with the trapezoid average of ``R`` before and after.
    """
    grid = psi0.grid
    check_step(dt, grid.k_max)
    potential = potential if potential is not None else NoPotential()
    R = R if R is not None else NoNonlinearity()
    sample_every = sample_every or steps
    V = potential.sample(grid)
    kinetic = np.exp(-1j * grid.k2 * dt)
    half_V = np.exp(-0.5j * V * dt)
    stats = FloorStats()
    if isinstance(R, NoNonlinearity) or (isinstance(R, DoebnerGoldin) and R.D == 0):
        half_step = _LinearHalfStep(half_V)
    elif isinstance(R, DoebnerGoldin):
        half_step = _DGHalfStep(R, grid, half_V, dt, floor, strict, stats)
    else:
        half_step = _ModulusHalfStep(R, grid, half_V, dt, floor, strict, stats)

    psi = psi0.psi.copy()
    h2 = grid.h**2
    norms = np.empty(steps + 1)
    norms[0] = float(np.sum(np.abs(psi) ** 2) * h2)
    samples = [WaveField(psi.copy(), grid, psi0.t)]
    for step in range(1, steps + 1):
        psi = half_step(psi)
        psi = ifft2(kinetic * fft2(psi))
        psi = half_step(psi)
        norms[step] = float(np.sum(np.abs(psi) ** 2) * h2)
        t = psi0.t + step * dt
        if guard:
            drift = abs(norms[step] - norms[0]) / norms[0]
            limit = DRIFT_PER_1000 * max(1.0, step / 1000)
            if drift > limit or not math.isfinite(drift):
                raise NumericalGuardError(step, t, drift, limit)
        if step % sample_every == 0:
            samples.append(WaveField(psi.copy(), grid, t))
    return Trajectory(samples, norms, stats)


class _LinearHalfStep:
    def __init__(self, half_V):
        self.half_V = half_V

    def __call__(self, psi):
        return self.half_V * psi


class _ModulusHalfStep:
    """R depends on |psi| only, so its phase step leaves R unchanged (exact)."""

    def __init__(self, R, grid, half_V, dt, floor, strict, stats):
        self.R, self.grid, self.half_V, self.dt = R, grid, half_V, dt
        self.floor, self.strict, self.stats = floor, strict, stats

    def __call__(self, psi):
        r = evaluate_R(self.R, WaveField(psi, self.grid), self.floor, self.strict, self.stats)
        return self.half_V * np.exp(-0.5j * self.dt * r.real) * psi


class _DGHalfStep:
    """Trapezoid-corrected phase step on the supported points.

    The corrector value ``R`` of one half step is reused as the predictor of
    the next one when nothing moved in between (second half of a step followed
    by the first half of the next); the reuse perturbs ``R`` by O(dt^2), which
    keeps the scheme second order.
    """

    def __init__(self, R, grid, half_V, dt, floor, strict, stats):
        self.R, self.grid, self.half_V, self.dt = R, grid, half_V, dt
        self.floor, self.strict, self.stats = floor, strict, stats
        self.carry = None  # (mask, values) valid for the next call's input
        self.calls = 0

    def _mask(self, psi):
        rho = psi.real**2 + psi.imag**2
        ok = rho >= self.floor * rho.max()
        bad = ok.size - int(ok.sum())
        if bad:
            if self.strict:
                idx = tuple(int(v) for v in np.argwhere(~ok)[0])
                raise DensityFloorError(idx, (self.grid.axis[idx[0]], self.grid.axis[idx[1]]))
            self.stats.points += bad
        return ok

    def _eval(self, psi, ok):
        self.stats.evaluations += 1
        return doebner_goldin_on_support(self.R, psi, self.grid, ok)

    def __call__(self, psi):
        self.calls += 1
        ok = self._mask(psi)
        reuse = self.calls % 2 == 1 and self.carry is not None and np.array_equal(self.carry[0], ok)
        r0 = self.carry[1] if reuse else self._eval(psi, ok)
        base = self.half_V * psi
        trial = base.copy()
        trial[ok] *= np.exp(-0.5j * self.dt * r0)
        r1 = self._eval(trial, ok)
        out = base
        out[ok] *= np.exp(-0.25j * self.dt * (r0 + r1))
        self.carry = (ok, r1)
        return out
