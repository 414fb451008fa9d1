"""Nonlinear functionals R[Psi]: none, Doebner-Goldin, logarithmic.

Units throughout: ``i dPsi/dt = (-Lap + V + R[Psi]) Psi``.  In these units the
gauge map ``Psi -> exp(2iD ln|Psi|) Psi`` turns linear solutions into solutions
of the Doebner-Goldin equation with prefactor ``2D`` and parameters
``c = (1, -D, 0, -1, D/2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .simulator.grid import Grid2D, WaveField, spectral_derivatives
from .symbolic import (
    I,
    Atom,
    Const,
    Exp,
    Expr,
    Ln,
    P,
    PB,
    Param,
    Poly,
    X,
    Y,
    to_poly,
    substitute_poly,
    parse_expression,
)

Real = Union[int, float, Fraction]

DEFAULT_FLOOR = 1e-12


class DensityFloorError(ValueError):
    """Density fell below the floor where a quotient nonlinearity is needed."""

    def __init__(self, index: Tuple[int, int], position: Tuple[float, float]):
        super().__init__(f"density under floor at grid index {index} (x1={position[0]:.4g}, x2={position[1]:.4g})")
        self.index = index
        self.position = position


@dataclass(frozen=True)
class NoNonlinearity:
    kind = "none"


@dataclass(frozen=True)
class DoebnerGoldin:
    D: Real
    c: Tuple[Real, Real, Real, Real, Real] = (0, 0, 0, 0, 0)

    kind = "doebner-goldin"

    def __post_init__(self):
        c = tuple(self.c)
        if len(c) != 5:
            raise ValueError("Doebner-Goldin needs exactly five parameters c1..c5")
        if not all(math.isfinite(float(v)) for v in (self.D,) + c):
            raise ValueError("Doebner-Goldin parameters must be finite")
        object.__setattr__(self, "c", c)

    @classmethod
    def gauge_generated(cls, D: Real) -> "DoebnerGoldin":
        """The linearizable family reached from the linear equation by ``N_D``."""
        D = _exact(D) if not isinstance(D, float) else D
        return cls(D, (1, -D, 0, -1, D / 2))


@dataclass(frozen=True)
class Logarithmic:
    b: Real

    kind = "logarithmic"

    def __post_init__(self):
        if not math.isfinite(float(self.b)):
            raise ValueError("coupling b must be finite")


RFunctional = Union[NoNonlinearity, DoebnerGoldin, Logarithmic]


def from_config(spec: Optional[dict]) -> RFunctional:
    """``{"type": "logarithmic", "b": 0.1}`` / ``{"type": "doebner-goldin", "D": 1, "c": [...]}``."""
    if spec is None or spec.get("type", "none") == "none":
        return NoNonlinearity()
    kind = spec["type"]
    if kind == "logarithmic":
        return Logarithmic(spec["b"])
    if kind == "doebner-goldin":
        return DoebnerGoldin(spec["D"], tuple(spec["c"]))
    raise ValueError(f"unknown nonlinearity type {kind!r}")


def to_config(f: RFunctional) -> dict:
    if isinstance(f, Logarithmic):
        return {"type": "logarithmic", "b": float(f.b)}
    if isinstance(f, DoebnerGoldin):
        return {"type": "doebner-goldin", "D": float(f.D), "c": [float(v) for v in f.c]}
    return {"type": "none"}


def _exact(v: Real) -> Fraction:
    if isinstance(v, float):
        return Fraction(repr(v))
    return Fraction(v)


# ---------------------------------------------------------------- numeric

@dataclass
class FloorStats:
    """Counts grid points where the density floor suppressed the nonlinearity."""

    points: int = 0
    evaluations: int = 0


def _floor_mask(rho: np.ndarray, floor: float) -> np.ndarray:
    return rho >= floor * rho.max()


def evaluate_R(
    f: RFunctional,
    psi: WaveField,
    floor: float = DEFAULT_FLOOR,
    strict: bool = False,
    stats: Optional[FloorStats] = None,
) -> np.ndarray:
    """Pointwise ``R[Psi]`` on the grid.

    Below ``floor * max(rho)`` the nonlinear term is set to zero (counted in
    ``stats``); ``strict=True`` raises :class:`DensityFloorError` instead.
    """
    grid = psi.grid
    if isinstance(f, NoNonlinearity):
        return np.zeros_like(psi.psi)
    rho = psi.density
    ok = _floor_mask(rho, floor)
    if not ok.all():
        if strict:
            idx = tuple(int(v) for v in np.argwhere(~ok)[0])
            raise DensityFloorError(idx, (grid.axis[idx[0]], grid.axis[idx[1]]))
        if stats is not None:
            stats.points += int((~ok).sum())
    if stats is not None:
        stats.evaluations += 1
    if isinstance(f, Logarithmic):
        amp = np.sqrt(np.where(ok, rho, floor * rho.max()))
        return (-2 * float(f.b) * np.log(amp)).astype(np.complex128)
    return _doebner_goldin_field(f, psi.psi, grid, ok)


def _doebner_goldin_field(f: DoebnerGoldin, psi: np.ndarray, grid: Grid2D, ok: np.ndarray) -> np.ndarray:
    out = np.zeros(psi.shape, dtype=np.complex128)
    out[ok] = doebner_goldin_on_support(f, psi, grid, ok)
    return out


def doebner_goldin_on_support(f: DoebnerGoldin, psi: np.ndarray, grid: Grid2D, ok: np.ndarray) -> np.ndarray:
    """DG values at the points selected by the boolean mask ``ok``."""
    # Quotients via u = grad(psi)/psi and w = Lap(psi)/psi keep the dynamic range of |psi|, not rho.
    gx, gy, lap = spectral_derivatives(psi, grid)
    p = psi[ok]
    ux, uy, w = gx[ok] / p, gy[ok] / p, lap[ok] / p
    uxr, uxi, uyr, uyi = ux.real, ux.imag, uy.real, uy.imag
    grad_sq = uxr * uxr + uyr * uyr
    lap_rho = 2 * w.real + 2 * (grad_sq + uxi * uxi + uyi * uyi)
    div_j = w.imag
    j2 = uxi * uxi + uyi * uyi
    j_grad = 2 * (uxi * uxr + uyi * uyr)
    c1, c2, c3, c4, c5 = (float(v) for v in f.c)
    real = c1 * div_j + c2 * lap_rho + c3 * j2 + c4 * j_grad + 4 * c5 * grad_sq
    return 2 * float(f.D) * (real + 0.5j * lap_rho)


# --------------------------------------------------------------- symbolic

def _coefficient(v: Real, name: Optional[str]) -> Poly:
    return Poly.kernel(Param(name)) if name is not None else Poly.const(_exact(v))


def evaluate_R_symbolic(f: RFunctional, symbolic_params: bool = False) -> Expr:
    """``R`` as an expression in ``P``, ``PB`` and their derivatives.

    With ``symbolic_params`` the couplings appear as parameters ``D, c1..c5, b``.
    """
    return r_poly(f, symbolic_params).to_expr()


def r_poly(f: RFunctional, symbolic_params: bool = False) -> Poly:
    if isinstance(f, NoNonlinearity):
        return Poly()
    rho = Poly.kernel(P) * Poly.kernel(PB)
    if isinstance(f, Logarithmic):
        b = _coefficient(f.b, "b" if symbolic_params else None)
        return -(b * to_poly(Ln(rho.to_expr())))
    D = _coefficient(f.D, "D" if symbolic_params else None)
    c = [_coefficient(v, f"c{i + 1}" if symbolic_params else None) for i, v in enumerate(f.c)]
    p, pb = Poly.kernel(P), Poly.kernel(PB)
    half_i = Poly.kernel(I).scale(Fraction(1, 2))
    inv_rho = rho.inverse()
    rho_x, rho_y = rho.diff(X), rho.diff(Y)
    lap_rho = rho_x.diff(X) + rho_y.diff(Y)
    # J = (PB grad P - P grad PB) / (2i) = -(i/2)(...)
    jx = -(half_i * (pb * p.diff(X) - p * pb.diff(X)))
    jy = -(half_i * (pb * p.diff(Y) - p * pb.diff(Y)))
    div_j = jx.diff(X) + jy.diff(Y)
    terms = (
        half_i * lap_rho * inv_rho
        + c[0] * div_j * inv_rho
        + c[1] * lap_rho * inv_rho
        + c[2] * (jx * jx + jy * jy) * inv_rho * inv_rho
        + c[3] * (jx * rho_x + jy * rho_y) * inv_rho * inv_rho
        + c[4] * (rho_x * rho_x + rho_y * rho_y) * inv_rho * inv_rho
    )
    return D.scale(2) * terms


# ------------------------------------------------------------- predicates

class RealityCheck(NamedTuple):
    is_real: bool
    witness: Optional[Expr]


SAMPLE_STATE = "exp(-x^2 - y^2 - x*y)"


def is_real_valued(f: RFunctional) -> RealityCheck:
    """Whether ``R`` is real; otherwise ``Im R`` on the real sample Gaussian."""
    if isinstance(f, (NoNonlinearity, Logarithmic)):
        return RealityCheck(True, None)
    sample = parse_expression(SAMPLE_STATE)
    value = substitute_poly(r_poly(f), {P: sample, PB: sample})
    # For a real state every real-valued symbol is real, so the I-part is Im R.
    imag = Poly({tuple((k, e) for k, e in m if k != I): c for m, c in value.terms.items() if (I, 1) in m})
    if imag.is_zero():
        return RealityCheck(True, None)
    return RealityCheck(False, imag.to_expr())


def is_galilei_covariant(f: DoebnerGoldin) -> bool:
    c1, _, c3, c4, _ = f.c
    return c3 == 0 and c1 + c4 == 0


def is_linearizable(f: RFunctional) -> Optional[Real]:
    """Gauge parameter ``D`` when ``f`` lies in the ``N_D``-generated family, else ``None``."""
    if isinstance(f, NoNonlinearity):
        return 0
    if not isinstance(f, DoebnerGoldin):
        return None
    D = f.D
    if D == 0:
        return 0
    c1, c2, c3, c4, c5 = f.c
    if c1 == 1 and c3 == 0 and c4 == -1 and c2 == -2 * c5 and D == -c2:
        return D
    return None
