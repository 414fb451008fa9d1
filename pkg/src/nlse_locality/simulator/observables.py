"""Marginals and moments of a two-particle field."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .grid import WaveField

WEIGHTS = ("1", "x1", "x1^2", "fourier", "region")


def marginal_density(psi: WaveField, particle: int = 1) -> np.ndarray:
    """``rho_1(x1) = int |Psi|^2 dx2`` (or ``rho_2`` for ``particle=2``) on the grid axis."""
    if particle not in (1, 2):
        raise ValueError("particle must be 1 or 2")
    return psi.density.sum(axis=2 - particle) * psi.grid.h


@dataclass(frozen=True)
class Observable:
    """Weight for ``moment``.

    ``region`` is ``G = {x in O or y in O}`` for the interval ``O``; the
    other weights act on particle 1 only.
    """

    weight: str = "x1^2"
    k: float = 0.0
    interval: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if self.weight not in WEIGHTS:
            raise ValueError(f"weight must be one of {WEIGHTS}")
        if self.weight == "region":
            if self.interval is None or not self.interval[0] < self.interval[1]:
                raise ValueError("region weight needs an interval (lo, hi) with lo < hi")

    def check(self, L: float) -> None:
        if self.weight == "fourier":
            m = self.k * L / math.pi
            if abs(m - round(m)) > 1e-9:
                raise ValueError(f"k={self.k} is not commensurate with the box (multiple of pi/L)")
        if self.weight == "region" and not (-L <= self.interval[0] and self.interval[1] <= L):
            raise ValueError("region interval leaves the box")

    def to_config(self) -> dict:
        out = {"weight": self.weight}
        if self.weight == "fourier":
            out["k"] = self.k
        if self.weight == "region":
            out["interval"] = list(self.interval)
        return out


def interval_weight(axis: np.ndarray, h: float, interval: Tuple[float, float]) -> np.ndarray:
    """Fraction of each grid cell ``[x - h/2, x + h/2]`` inside the interval.

    Partial cells at the ends keep the quadrature second order in ``h``.
    """
    lo, hi = interval
    return np.clip((np.minimum(axis + h / 2, hi) - np.maximum(axis - h / 2, lo)) / h, 0.0, 1.0)


def region_weight(psi: WaveField, interval: Tuple[float, float]) -> np.ndarray:
    """Quadrature weight of ``G = {x in O or y in O}``: ``1 - (1 - w(x)) (1 - w(y))``."""
    w = interval_weight(psi.grid.axis, psi.grid.h, interval)
    return 1 - np.outer(1 - w, 1 - w)


def moment(psi: WaveField, obs: Observable) -> complex:
    obs.check(psi.grid.L)
    if obs.weight == "region":
        return complex(psi.grid.integrate(region_weight(psi, obs.interval) * psi.density))
    x = psi.grid.axis
    w = {
        "1": np.ones_like(x),
        "x1": x,
        "x1^2": x**2,
        "fourier": np.exp(1j * obs.k * x) if obs.weight == "fourier" else None,
    }[obs.weight]
    return complex(np.sum(w * marginal_density(psi)) * psi.grid.h)


def cross_term(chi: WaveField, phi: WaveField, interval: Tuple[float, float], sigma: int = 1) -> float:
    """``sigma * 2 Re int_G conj(chi) phi``, the exchange cross term of ``|chi + sigma phi|^2``."""
    val = np.sum(region_weight(chi, interval) * np.conj(chi.psi) * phi.psi) * chi.grid.h**2
    return float(sigma * 2 * val.real)


__all__ = ["Observable", "WEIGHTS", "cross_term", "marginal_density", "interval_weight", "moment", "region_weight"]
