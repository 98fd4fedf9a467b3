"""Uniform box grids, complex fields on them, and spectral transforms.

The box is [-L, L)^N sampled with n points per axis, spacing h = 2L/n.
Transforms use the symmetric continuum normalisation

    f^(ξ) = (2π)^{-N/2} ∫ e^{-i x·ξ} f(x) dx,

discretised with h^N weights, so that discrete Parseval reproduces
∫|f|^2 dx = ∫|f^|^2 dξ.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import InvalidParams, PoisonedField

MAX_POINTS = 2**28
#: fraction of the half-width that counts as the boundary layer
BOUNDARY_LAYER = 0.125


class BoundaryMassWarning(UserWarning):
    """Field mass reaches the box boundary; enlarge L."""


def fft_workers() -> int:
    """Worker count handed to scipy.fft (set through :func:`set_fft_workers`)."""
    return _FFT_WORKERS[0]


_FFT_WORKERS = [1]


def set_fft_workers(k: int) -> None:
    _FFT_WORKERS[0] = max(1, int(k))


def _is_fft_friendly(n: int) -> bool:
    m = n
    for f in (2, 3, 5):
        while m % f == 0:
            m //= f
    return m == 1


@dataclass(frozen=True)
class Grid:
    """Box [-L, L)^N with ``n`` points per axis."""

    N: int
    n: int
    L: float

    def __post_init__(self):
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "L", float(self.L))
        if self.N not in (1, 2, 3, 4):
            raise InvalidParams(f"grid dimension must be 1..4, got {self.N}")
        if self.n < 8 or self.n % 2 or not _is_fft_friendly(self.n):
            raise InvalidParams(f"n must be even, >= 8 and 5-smooth, got {self.n}")
        if not (self.L > 0 and math.isfinite(self.L)):
            raise InvalidParams(f"need L > 0, got {self.L}")
        if self.n**self.N > MAX_POINTS:
            raise InvalidParams(f"n^N = {self.n ** self.N} exceeds {MAX_POINTS}")

    @property
    def h(self) -> float:
        return 2 * self.L / self.n

    @property
    def cell_volume(self) -> float:
        return self.h**self.N

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.N

    @cached_property
    def x(self) -> np.ndarray:
        """1-D coordinates -L + j h."""
        return -self.L + self.h * np.arange(self.n)

    @cached_property
    def xi(self) -> np.ndarray:
        """1-D angular wavenumbers in FFT order."""
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.h)

    def coords(self) -> list:
        """Sparse open-mesh coordinate arrays, one per axis."""
        return np.meshgrid(*([self.x] * self.N), indexing="ij", sparse=True)

    def wavenumbers(self) -> list:
        return np.meshgrid(*([self.xi] * self.N), indexing="ij", sparse=True)

    @cached_property
    def r2(self) -> np.ndarray:
        out = np.zeros(self.shape)
        for c in self.coords():
            out = out + c * c
        return out

    @cached_property
    def xi2(self) -> np.ndarray:
        out = np.zeros(self.shape)
        for k in self.wavenumbers():
            out = out + k * k
        return out

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        edge = (1 - BOUNDARY_LAYER) * self.L
        mask = np.zeros(self.shape, dtype=bool)
        for c in self.coords():
            mask = mask | (np.abs(c) >= edge)
        return mask

    def integrate(self, f: np.ndarray) -> float:
        return float(np.sum(f) * self.cell_volume)

    def boundary_fraction(self, density: np.ndarray) -> float:
        """Share of ∫density carried by the outer boundary layer of the box."""
        total = float(np.sum(density))
        if total <= 0:
            return 0.0
        return float(np.sum(density[self.boundary_mask])) / total


class ComplexField:
    """Complex samples of a function on a :class:`Grid` (C order)."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values):
        values = np.asarray(values)
        if values.shape != grid.shape:
            values = values.reshape(grid.shape)
        self.grid = grid
        self.values = np.ascontiguousarray(values, dtype=np.complex128)

    @classmethod
    def zeros(cls, grid: Grid) -> "ComplexField":
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128))

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "ComplexField":
        """Sample ``fn(*coords)`` where coords are broadcastable axis arrays."""
        return cls(grid, np.broadcast_to(fn(*grid.coords()), grid.shape))

    @classmethod
    def gaussian(cls, grid: Grid, beta: float, gamma: float, velocity=None, chirp: float = 0.0):
        """beta * exp(-gamma |x|^2 / 2), optionally boosted by exp(i v·x) and chirped by exp(i c |x|^2)."""
        vals = beta * np.exp(-0.5 * gamma * grid.r2)
        phase = chirp * grid.r2 if chirp else 0.0
        if velocity is not None:
            for v, c in zip(velocity, grid.coords()):
                phase = phase + v * c
        if np.any(phase):
            vals = vals * np.exp(1j * phase)
        return cls(grid, vals)

    def copy(self) -> "ComplexField":
        return ComplexField(self.grid, self.values.copy())

    def check_finite(self) -> "ComplexField":
        if not np.all(np.isfinite(self.values)):
            raise PoisonedField("field contains NaN or Inf samples")
        return self

    def boundary_fraction(self) -> float:
        return self.grid.boundary_fraction(np.abs(self.values) ** 2)

    def __mul__(self, c):
        return ComplexField(self.grid, self.values * c)

    __rmul__ = __mul__

    def __repr__(self):
        return f"ComplexField(grid={self.grid!r})"


def warn_if_boundary(grid: Grid, density: np.ndarray, threshold: float = 1e-6) -> float:
    frac = grid.boundary_fraction(density)
    if frac > threshold:
        warnings.warn(
            f"{frac:.2e} of the density lies in the boundary layer of the box (L={grid.L})",
            BoundaryMassWarning,
            stacklevel=3,
        )
    return frac


@dataclass
class SpectralField:
    """Transform-space coefficients on the grid's wavenumber lattice (FFT order)."""

    grid: Grid
    coefficients: np.ndarray

    @property
    def dxi(self) -> float:
        return np.pi / self.grid.L


def _shift_sign(grid: Grid) -> np.ndarray:
    # e^{i ξ_m L} = (-1)^m for the box starting at -L
    m = np.fft.fftfreq(grid.n, d=1.0 / grid.n).astype(int)
    s = np.where(m % 2 == 0, 1.0, -1.0)
    out = np.ones(grid.shape)
    for ax in range(grid.N):
        shape = [1] * grid.N
        shape[ax] = grid.n
        out = out * s.reshape(shape)
    return out


def transform_forward(f: ComplexField) -> SpectralField:
    f.check_finite()
    g = f.grid
    scale = g.cell_volume / (2 * np.pi) ** (g.N / 2)
    coef = sfft.fftn(f.values, workers=fft_workers()) * _shift_sign(g) * scale
    return SpectralField(g, coef)


def transform_inverse(s: SpectralField) -> ComplexField:
    g = s.grid
    if not np.all(np.isfinite(s.coefficients)):
        raise PoisonedField("spectral coefficients contain NaN or Inf")
    scale = g.cell_volume / (2 * np.pi) ** (g.N / 2)
    vals = sfft.ifftn(s.coefficients * _shift_sign(g), workers=fft_workers()) / scale
    return ComplexField(g, vals)


def _derivative_symbol(grid: Grid, axis: int) -> np.ndarray:
    k = grid.xi.copy()
    k[grid.n // 2] = 0.0  # Nyquist mode has no odd derivative
    shape = [1] * grid.N
    shape[axis] = grid.n
    return (1j * k).reshape(shape)


def spectral_gradient(u: ComplexField) -> list:
    """Componentwise ∂_j u by multiplication with iξ_j in transform space."""
    u.check_finite()
    g = u.grid
    uh = sfft.fftn(u.values, workers=fft_workers())
    return [
        ComplexField(g, sfft.ifftn(uh * _derivative_symbol(g, ax), workers=fft_workers()))
        for ax in range(g.N)
    ]
