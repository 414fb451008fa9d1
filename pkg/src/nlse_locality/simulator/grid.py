"""Periodic 2D grid and wave fields for two 1-dimensional particles.

Array axis 0 is particle 1 (``x``), axis 1 is particle 2 (``y``).
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import BinaryIO, Optional, Tuple

import numpy as np
import scipy.fft as sfft


class BoxEdgeWarning(UserWarning):
    pass


_WORKERS = 1


def set_threads(n: int) -> None:
    """Worker threads for the 2D transforms (``-1`` = all cores)."""
    global _WORKERS
    if n == 0 or n < -1:
        raise ValueError("thread count must be positive or -1")
    _WORKERS = n


def fft2(f: np.ndarray) -> np.ndarray:
    return sfft.fft2(f, workers=_WORKERS)


def ifft2(F: np.ndarray) -> np.ndarray:
    return sfft.ifft2(F, workers=_WORKERS)


@dataclass(frozen=True)
class Grid2D:
    N: int = 256
    L: float = 12.0

    def __post_init__(self):
        if self.N < 32 or self.N & (self.N - 1):
            raise ValueError(f"N must be a power of two >= 32, got {self.N}")
        if not self.L > 0:
            raise ValueError("box half-width must be positive")

    @property
    def h(self) -> float:
        return 2 * self.L / self.N

    @cached_property
    def axis(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.N)

    @cached_property
    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.axis, self.axis, indexing="ij")

    @cached_property
    def k(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.N, d=self.h)

    @cached_property
    def kmesh(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.k, self.k, indexing="ij")

    @cached_property
    def k2(self) -> np.ndarray:
        kx, ky = self.kmesh
        return kx**2 + ky**2

    @property
    def k_max(self) -> float:
        return np.pi / self.h

    def integrate(self, values: np.ndarray):
        return values.sum() * self.h**2


@dataclass
class WaveField:
    """Complex amplitudes ``psi[i1, i2] = Psi(x1_i1, x2_i2)`` on ``grid``."""

    psi: np.ndarray
    grid: Grid2D
    t: float = 0.0

    def __post_init__(self):
        self.psi = np.asarray(self.psi, dtype=np.complex128)
        if self.psi.shape != (self.grid.N, self.grid.N):
            raise ValueError(f"field shape {self.psi.shape} does not match grid {self.grid.N}")
        if not np.all(np.isfinite(self.psi)):
            raise ValueError("wave field has non-finite entries")

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.psi) ** 2

    @property
    def norm2(self) -> float:
        return float(self.grid.integrate(self.density))

    def normalized(self) -> "WaveField":
        return WaveField(self.psi / np.sqrt(self.norm2), self.grid, self.t)

    def with_psi(self, psi: np.ndarray) -> "WaveField":
        return WaveField(psi, self.grid, self.t)

    def edge_amplitude(self) -> float:
        a = np.abs(self.psi)
        edge = max(a[0].max(), a[-1].max(), a[:, 0].max(), a[:, -1].max())
        return float(edge / a.max()) if a.max() > 0 else 0.0

    def check_edges(self, tol: float = 1e-12) -> bool:
        ok = self.edge_amplitude() <= tol
        if not ok:
            warnings.warn(
                f"field does not decay at box edges (relative amplitude {self.edge_amplitude():.2e})",
                BoxEdgeWarning,
                stacklevel=2,
            )
        return ok

    # raw dump: little-endian int32 N, float64 L, float64 t, then N*N (re, im) float64 pairs
    def dump(self, fh: BinaryIO) -> None:
        fh.write(struct.pack("<idd", self.grid.N, self.grid.L, self.t))
        pairs = np.empty((self.grid.N, self.grid.N, 2), dtype="<f8")
        pairs[..., 0] = self.psi.real
        pairs[..., 1] = self.psi.imag
        fh.write(pairs.tobytes(order="C"))

    @classmethod
    def load(cls, fh: BinaryIO) -> "WaveField":
        N, L, t = struct.unpack("<idd", fh.read(struct.calcsize("<idd")))
        pairs = np.frombuffer(fh.read(N * N * 16), dtype="<f8").reshape(N, N, 2)
        return cls(pairs[..., 0] + 1j * pairs[..., 1], Grid2D(N, L), t)


def spectral_gradient(f: np.ndarray, grid: Grid2D) -> Tuple[np.ndarray, np.ndarray]:
    F = fft2(f)
    kx, ky = grid.kmesh
    return ifft2(1j * kx * F), ifft2(1j * ky * F)


def spectral_laplacian(f: np.ndarray, grid: Grid2D) -> np.ndarray:
    return ifft2(-grid.k2 * fft2(f))


def spectral_derivatives(f: np.ndarray, grid: Grid2D):
    """``(df/dx, df/dy, Lap f)`` from a single forward transform."""
    F = fft2(f)
    kx, ky = grid.kmesh
    return (
        ifft2(1j * kx * F),
        ifft2(1j * ky * F),
        ifft2(-grid.k2 * F),
    )
