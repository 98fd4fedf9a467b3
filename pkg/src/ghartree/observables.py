"""Conserved and monitored quantities of a gHartree field.

All integrals are plain h^N Riemann sums over the box, which is spectrally
accurate for smooth data that has decayed at the box edge. Gradients are
spectral. Coordinates are box-centred, so the variance measures spread
about the origin of the box.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .eqparams import EquationParams
from .grid import ComplexField, fft_workers, spectral_gradient
from .riesz import RieszKernel, nonlinear_potential

CSV_COLUMNS = ("t", "mass", "energy", "grad_norm_sq", "z", "variance", "variance_rate")


@dataclass(frozen=True)
class ObservableSet:
    """Snapshot of every monitored functional at one time."""

    mass: float
    energy: float
    z_value: float
    momentum: tuple
    grad_norm_sq: float
    variance: float
    variance_rate: float
    time: float = 0.0
    virial: tuple = field(default=(float("nan"), float("nan")))

    @staticmethod
    def csv_header(N: int) -> list:
        return list(CSV_COLUMNS) + [f"momentum_{j}" for j in range(N)]

    def csv_row(self) -> list:
        vals = [self.time, self.mass, self.energy, self.grad_norm_sq, self.z_value, self.variance, self.variance_rate]
        return vals + list(self.momentum)

    def as_dict(self) -> dict:
        return {
            "time": self.time,
            "mass": self.mass,
            "energy": self.energy,
            "z": self.z_value,
            "momentum": list(self.momentum),
            "grad_norm_sq": self.grad_norm_sq,
            "variance": self.variance,
            "variance_rate": self.variance_rate,
        }


def mass(u: ComplexField) -> float:
    u.check_finite()
    v = u.values
    return u.grid.integrate(v.real**2 + v.imag**2)


def grad_norm_sq(u: ComplexField) -> float:
    """‖∇u‖² through Parseval, Σ|ξ|²|û|² with the discrete normalisation."""
    u.check_finite()
    g = u.grid
    uh = sfft.fftn(u.values, workers=fft_workers())
    dens = uh.real**2 + uh.imag**2
    return float(np.sum(g.xi2 * dens)) * g.cell_volume / g.n**g.N


def z_functional(u: ComplexField, params: EquationParams, kernel: RieszKernel | None = None) -> float:
    """Potential pairing Z(u) = ∫ (|x|^{-b} * |u|^p) |u|^p."""
    V = nonlinear_potential(u, params, kernel)
    return u.grid.integrate(V * np.abs(u.values) ** params.p)


def energy(u: ComplexField, params: EquationParams, kernel: RieszKernel | None = None) -> float:
    return 0.5 * grad_norm_sq(u) - z_functional(u, params, kernel) / (2 * params.p)


def momentum(u: ComplexField) -> np.ndarray:
    """Im ∫ ū ∇u, one component per axis."""
    grads = spectral_gradient(u)
    conj = np.conj(u.values)
    return np.array([u.grid.integrate((conj * d.values).imag) for d in grads])


def variance(u: ComplexField) -> float:
    """V = ∫ |x|² |u|²."""
    u.check_finite()
    v = u.values
    return u.grid.integrate(u.grid.r2 * (v.real**2 + v.imag**2))


def variance_rate(u: ComplexField) -> float:
    """V_t = 4 Im ∫ ū x·∇u."""
    grads = spectral_gradient(u)
    acc = np.zeros(u.grid.shape, dtype=np.complex128)
    for c, d in zip(u.grid.coords(), grads):
        acc += c * d.values
    return 4 * u.grid.integrate((np.conj(u.values) * acc).imag)


def virial_pair(E: float, Z: float, G: float, params: EquationParams) -> tuple:
    """(16E - (8k/p)Z, 16(k+1)E - 8kG): the two forms of V_tt."""
    k = params.k
    return 16 * E - 8 * k * Z / params.p, 16 * (k + 1) * E - 8 * k * G


def virial_acceleration(u: ComplexField, params: EquationParams, kernel: RieszKernel | None = None) -> tuple:
    G = grad_norm_sq(u)
    Z = z_functional(u, params, kernel)
    return virial_pair(0.5 * G - Z / (2 * params.p), Z, G, params)


def observe(u: ComplexField, params: EquationParams, kernel: RieszKernel | None = None, time: float = 0.0) -> ObservableSet:
    """Evaluate all observables, sharing one gradient and one convolution."""
    u.check_finite()
    g = u.grid
    vals = u.values
    dens = vals.real**2 + vals.imag**2
    M = g.integrate(dens)
    G = grad_norm_sq(u)
    Z = z_functional(u, params, kernel)
    E = 0.5 * G - Z / (2 * params.p)
    grads = spectral_gradient(u)
    conj = np.conj(vals)
    P = []
    acc = np.zeros(g.shape, dtype=np.complex128)
    for c, d in zip(g.coords(), grads):
        prod = conj * d.values
        P.append(g.integrate(prod.imag))
        acc += c * prod
    return ObservableSet(
        mass=M,
        energy=E,
        z_value=Z,
        momentum=tuple(P),
        grad_norm_sq=G,
        variance=g.integrate(g.r2 * dens),
        variance_rate=4 * g.integrate(acc.imag),
        time=float(time),
        virial=virial_pair(E, Z, G, params),
    )
