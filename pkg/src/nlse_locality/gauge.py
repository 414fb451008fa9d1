"""Nonlinear gauge map ``N_D Psi = exp(2iD ln|Psi|) Psi`` and position probabilities."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .nonlinearity import DEFAULT_FLOOR, DensityFloorError, DoebnerGoldin, evaluate_R
from .simulator.grid import WaveField, spectral_laplacian


def apply_gauge(psi: WaveField, D: float, floor: float = DEFAULT_FLOOR) -> WaveField:
    """Multiply by ``exp(2iD ln|Psi|)``; modulus is untouched.

    Points with ``|Psi|^2`` under ``floor * max|Psi|^2`` keep their value (the
    phase is undefined there); exact zeros stay zero.
    """
    if D == 0:
        return psi.with_psi(psi.psi.copy())
    amp = np.abs(psi.psi)
    rho = amp**2
    ok = rho >= floor * rho.max() if rho.max() > 0 else np.zeros_like(rho, dtype=bool)
    log_amp = np.log(np.where(ok, amp, 1.0))
    phase = np.exp(2j * float(D) * log_amp)
    return psi.with_psi(np.where(ok, psi.psi * phase, psi.psi))


def inverse_gauge(psi: WaveField, D: float, floor: float = DEFAULT_FLOOR) -> WaveField:
    return apply_gauge(psi, -D, floor)


@dataclass(frozen=True)
class Box:
    """Axis-aligned region ``[x_lo, x_hi) x [y_lo, y_hi)``; ``None`` bounds are open."""

    x: Tuple[Optional[float], Optional[float]] = (None, None)
    y: Tuple[Optional[float], Optional[float]] = (None, None)

    def mask(self, psi: WaveField) -> np.ndarray:
        X1, X2 = psi.grid.mesh
        return _interval(X1, self.x) & _interval(X2, self.y)


def _interval(v: np.ndarray, bounds) -> np.ndarray:
    lo, hi = bounds
    m = np.ones(v.shape, dtype=bool)
    if lo is not None:
        m &= v >= lo
    if hi is not None:
        m &= v < hi
    return m


def region_probability(psi: WaveField, region: Box) -> float:
    return float(psi.grid.integrate(np.where(region.mask(psi), psi.density, 0.0)))


def gauge_equivariance_residual(
    trajectory: Sequence[WaveField],
    D: float,
    potential: Optional[np.ndarray] = None,
    floor: float = DEFAULT_FLOOR,
) -> float:
    """``||i dPhi/dt - (-Lap + V + R_el[Phi]) Phi||_2`` at the middle sample, ``Phi = N_D Psi'``.

    ``trajectory`` holds consecutive equally spaced snapshots of a linear run;
    the time derivative is the centered difference around the middle one.
    """
    if len(trajectory) < 3:
        raise ValueError("need at least three snapshots for a centered difference")
    mid = len(trajectory) // 2
    before, here, after = trajectory[mid - 1], trajectory[mid], trajectory[mid + 1]
    dt = (after.t - before.t) / 2
    if not dt > 0:
        raise ValueError("snapshots must be ordered in time")
    phi = [apply_gauge(w, D, floor) for w in (before, here, after)]
    dphi = 1j * (phi[2].psi - phi[0].psi) / (2 * dt)
    grid = here.grid
    V = 0.0 if potential is None else potential
    R = evaluate_R(DoebnerGoldin.gauge_generated(D), phi[1], floor=floor)
    rhs = -spectral_laplacian(phi[1].psi, grid) + (V + R) * phi[1].psi
    return float(np.sqrt(grid.integrate(np.abs(dphi - rhs) ** 2)))


@dataclass(frozen=True)
class ResidualConvergence:
    spacings: Tuple[float, ...]
    residuals: Tuple[float, ...]

    @property
    def ratios(self) -> Tuple[float, ...]:
        r = self.residuals
        return tuple(a / b for a, b in zip(r, r[1:]))

    @property
    def order(self) -> float:
        """Observed order from the last halving."""
        return float(np.log2(self.ratios[-1]))


def residual_convergence(
    trajectory: Sequence[WaveField],
    D: float,
    potential: Optional[np.ndarray] = None,
    halvings: int = 2,
    floor: float = DEFAULT_FLOOR,
) -> ResidualConvergence:
    """Residual at the middle snapshot for spacings ``2^j`` samples, ``j = halvings..0``.

    Needs ``2^(halvings+1) + 1`` equally spaced snapshots.
    """
    need = 2 ** (halvings + 1) + 1
    if len(trajectory) < need:
        raise ValueError(f"need {need} snapshots for {halvings} halvings")
    mid = len(trajectory) // 2
    spacings, residuals = [], []
    for j in range(halvings, -1, -1):
        k = 2**j
        triple = [trajectory[mid - k], trajectory[mid], trajectory[mid + k]]
        spacings.append(triple[2].t - triple[1].t)
        residuals.append(gauge_equivariance_residual(triple, D, potential, floor))
    return ResidualConvergence(tuple(spacings), tuple(residuals))


__all__ = [
    "Box",
    "ResidualConvergence",
    "DensityFloorError",
    "apply_gauge",
    "gauge_equivariance_residual",
    "inverse_gauge",
    "region_probability",
    "residual_convergence",
]
