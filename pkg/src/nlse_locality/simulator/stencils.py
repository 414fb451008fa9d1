"""One-sided finite-difference stencils for time derivatives at ``t = 0``.

Weights come from Fornberg's recursion run in exact rational arithmetic on
integer nodes ``0, 1, ..., m-1``; dividing by ``h^n`` gives the physical
stencil.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Tuple

import numpy as np


@lru_cache(maxsize=None)
def fornberg_weights(nodes: Tuple[int, ...], order: int, x0: int = 0) -> Tuple[Fraction, ...]:
    """Exact weights ``w`` with ``sum w_j f(nodes_j) ~ f^(order)(x0)`` (unit spacing)."""
    m = len(nodes)
    if order < 0 or order >= m:
        raise ValueError(f"need more than {order} nodes for derivative order {order}")
    if len(set(nodes)) != m:
        raise ValueError("stencil nodes must be distinct")
    z = [Fraction(v) for v in nodes]
    x0 = Fraction(x0)
    c = [[Fraction(0)] * (order + 1) for _ in range(m)]
    c[0][0] = Fraction(1)
    c1 = Fraction(1)
    c4 = z[0] - x0
    for i in range(1, m):
        mn = min(i, order)
        c2 = Fraction(1)
        c5, c4 = c4, z[i] - x0
        for j in range(i):
            c3 = z[i] - z[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2
            for k in range(mn, 0, -1):
                c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3
            c[j][0] = c4 * c[j][0] / c3
        c1 = c2
    return tuple(c[j][order] for j in range(m))


def samples_needed(n: int) -> int:
    """``m = 2n + 2`` samples for the n-th derivative."""
    return 2 * n + 2


@dataclass(frozen=True)
class DerivativeEstimate:
    value: float
    truncation: float  # |m-point minus (m+1)-point estimate|
    rounding: float

    @property
    def error(self) -> float:
        return self.truncation + self.rounding


def forward_derivative(series: Sequence[float], h: float, n: int, m: int | None = None) -> DerivativeEstimate:
    """n-th derivative at the first sample of a uniformly spaced series.

    The truncation error is the difference to the stencil using one more
    sample; the rounding term is ``eps * sum|w| * max|f| / h^n``.
    """
    m = m or samples_needed(n)
    y = np.asarray(series, dtype=float)
    if y.size < m + 1:
        raise ValueError(f"need {m + 1} samples, got {y.size}")
    w = np.array([float(v) for v in fornberg_weights(tuple(range(m)), n)])
    w_fine = np.array([float(v) for v in fornberg_weights(tuple(range(m + 1)), n)])
    scale = h**n
    value = float(w @ y[:m]) / scale
    other = float(w_fine @ y[: m + 1]) / scale
    rounding = np.finfo(float).eps * float(np.abs(w_fine).sum()) * float(np.abs(y[: m + 1]).max()) / scale
    return DerivativeEstimate(value, abs(value - other), rounding)


def stencil_order(n: int, m: int) -> int:
    """Accuracy order of the m-point one-sided n-th derivative stencil."""
    return m - n


__all__ = [
    "DerivativeEstimate",
    "forward_derivative",
    "fornberg_weights",
    "samples_needed",
    "stencil_order",
]
