"""External potentials and initial data sampled on the grid."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Optional, Union

import numpy as np

from ..symbolic import evaluate, parse_expression, to_poly
from .grid import Grid2D, WaveField


class BoxMarginError(ValueError):
    """Support of a potential or of the initial data reaches the box edge."""


# ---------------------------------------------------------------- potentials

@dataclass(frozen=True)
class NoPotential:
    lam: float = 0.0

    def sample(self, grid: Grid2D) -> np.ndarray:
        return np.zeros((grid.N, grid.N))

    def with_lambda(self, lam: float) -> "NoPotential":
        return replace(self, lam=lam)


@dataclass(frozen=True)
class Harmonic2:
    """``V = lam (x2 - x0)^2``, acting on particle 2 only."""

    lam: float
    x0: float = 0.0

    def sample(self, grid: Grid2D) -> np.ndarray:
        _, X2 = grid.mesh
        return self.lam * (X2 - self.x0) ** 2

    def with_lambda(self, lam: float) -> "Harmonic2":
        return replace(self, lam=lam)


def bump(s: np.ndarray, width: float) -> np.ndarray:
    """Compactly supported ``(1 - (s/w)^2)^4`` on ``|s| < w``."""
    u = np.clip(1 - (s / width) ** 2, 0.0, None)
    return u**4


@dataclass(frozen=True)
class Displaced:
    """``U(x, y) = lam (bump(y - d) + bump(x - d))`` for the exchange-symmetric setting."""

    lam: float
    d: float
    width: float = 1.0
    margin: float = 1.0

    def check(self, grid: Grid2D) -> None:
        if abs(self.d) + self.width > grid.L - self.margin:
            raise BoxMarginError(f"bump at d={self.d} with width {self.width} leaves the box margin")

    def sample(self, grid: Grid2D) -> np.ndarray:
        self.check(grid)
        X1, X2 = grid.mesh
        return self.lam * (bump(X2 - self.d, self.width) + bump(X1 - self.d, self.width))

    def with_lambda(self, lam: float) -> "Displaced":
        return replace(self, lam=lam)


PotentialSpec = Union[NoPotential, Harmonic2, Displaced]


def potential_from_config(spec: Optional[Mapping]) -> PotentialSpec:
    if spec is None or spec.get("type", "none") == "none":
        return NoPotential()
    kind = spec["type"]
    if kind == "harmonic":
        return Harmonic2(float(spec["lambda"]), float(spec.get("x0", 0.0)))
    if kind == "displaced":
        return Displaced(float(spec["lambda"]), float(spec["d"]), float(spec.get("width", 1.0)))
    raise ValueError(f"unknown potential type {kind!r}")


# -------------------------------------------------------------- initial data

def _sample(expr: str, x: np.ndarray, y: np.ndarray, params: Mapping[str, float]) -> np.ndarray:
    poly = to_poly(parse_expression(expr, params=params.keys()))
    env = dict(params)
    env.update(x=x, y=y, t=0.0)
    values = evaluate(poly, env)
    return np.broadcast_to(np.asarray(values, dtype=complex), x.shape).copy()


@dataclass(frozen=True)
class ClosedForm:
    """Closed-form ``Psi_0(x, y)`` in the expression grammar; ``shift`` moves the second argument."""

    expr: str
    params: Mapping[str, float] = None
    shift: float = 0.0
    normalize: bool = True

    def sample(self, grid: Grid2D) -> WaveField:
        X1, X2 = grid.mesh
        field = WaveField(_sample(self.expr, X1, X2 - self.shift, self.params or {}), grid)
        return field.normalized() if self.normalize else field


PARTS = ("full", "chi", "phi")


@dataclass(frozen=True)
class SymmetrizedPair:
    """``Psi^(d) = f(x, y-d) + sigma f(y, x-d)``; ``chi = f(x, y-d)``, ``phi = f(y, x-d)``.

    No normalization: the three parts must share one scale so that
    ``|Psi|^2 - |chi|^2 - |phi|^2`` is the pure cross term.
    """

    f: str
    d: float
    sigma: int = 1
    part: str = "full"
    params: Mapping[str, float] = None

    def __post_init__(self):
        if self.sigma not in (1, -1):
            raise ValueError("sigma must be +1 or -1")
        if self.part not in PARTS:
            raise ValueError(f"part must be one of {PARTS}")

    def sample(self, grid: Grid2D) -> WaveField:
        X1, X2 = grid.mesh
        p = self.params or {}
        chi = _sample(self.f, X1, X2 - self.d, p)
        phi = _sample(self.f, X2, X1 - self.d, p)
        psi = {"full": chi + self.sigma * phi, "chi": chi, "phi": phi}[self.part]
        return WaveField(psi, grid)

    def with_part(self, part: str) -> "SymmetrizedPair":
        return replace(self, part=part)


InitialSpec = Union[ClosedForm, SymmetrizedPair]
