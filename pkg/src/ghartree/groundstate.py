"""Ground states, Pohozhaev diagnostics and sharp constants.

The ground state solves

    -ΔQ + Q - (|x|^{-b} * |Q|^p) |Q|^{p-2} Q = 0

and is computed by Petviashvili's stabilised fixed-point iteration in
transform space. In the energy-critical case b = N - 2 an explicit
algebraic profile is available and is checked by radial quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .eqparams import EquationParams, classify
from .errors import Divergence, InvalidParams, NoConvergence, UnconvergedInput, WrongRegime
from .grid import ComplexField, Grid, fft_workers
from .radial import radial_integral, radial_potential
from .riesz import RieszKernel, riesz_convolve, riesz_kernel

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 500
S_BOUNDS = (1e-6, 1e6)


@dataclass
class GroundStateResult:
    """Converged Petviashvili profile with its integral diagnostics."""

    params: EquationParams
    profile: ComplexField
    residual: float
    mass_Q: float
    grad_sq_Q: float
    z_Q: float
    c_gn: float
    iterations: int
    stabilizer: float
    tol: float
    converged: bool = True
    history: list = field(default_factory=list, repr=False)

    @property
    def energy_Q(self) -> float:
        return 0.5 * self.grad_sq_Q - self.z_Q / (2 * self.params.p)

    def pohozhaev(self) -> dict:
        """Ratios ‖∇Q‖²/‖Q‖², Z(Q)/‖Q‖² and E[Q]/M[Q] with their exact targets."""
        N, p, b = self.params.N, self.params.p, self.params.b
        # G + M = Z and (N-2)G/2 + N M/2 = (2N-b) Z/(2p) fix both ratios
        a = (2 * N - b) / (2 * p)
        g_ratio = (N / 2 - a) / (a - (N - 2) / 2)
        z_ratio = g_ratio + 1
        return {
            "grad_over_mass": (self.grad_sq_Q / self.mass_Q, g_ratio),
            "z_over_mass": (self.z_Q / self.mass_Q, z_ratio),
            "energy_over_mass": (self.energy_Q / self.mass_Q, 0.5 * g_ratio - z_ratio / (2 * p)),
        }

    def diagnostics(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "grid": {"N": self.profile.grid.N, "n": self.profile.grid.n, "L": self.profile.grid.L},
            "residual": self.residual,
            "mass_Q": self.mass_Q,
            "grad_sq_Q": self.grad_sq_Q,
            "z_Q": self.z_Q,
            "energy_Q": self.energy_Q,
            "c_gn": self.c_gn,
            "iterations": self.iterations,
            "stabilizer": self.stabilizer,
            "pohozhaev": {k: v[0] for k, v in self.pohozhaev().items()},
        }


def _weinstein(Z: float, G: float, M: float, params: EquationParams) -> float:
    s_c, p = params.s_c, params.p
    return Z / (G ** (s_c * (p - 1) + 1) * M ** ((1 - s_c) * (p - 1)))


def petviashvili_solve(
    params: EquationParams,
    grid: Grid,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    kernel: RieszKernel | None = None,
    seed: np.ndarray | None = None,
) -> GroundStateResult:
    """Petviashvili iteration Q <- S^σ (1 - Δ)^{-1} N(Q), σ = (2p-1)/(2p-2).

    Parameters
    ----------
    params : EquationParams
        Must satisfy s_c < 1.
    grid : Grid
        Box on which the profile is sampled; L should exceed about 10.
    tol : float
        Target for the L² norm of -ΔQ + Q - N(Q).
    max_iter : int
        Iteration budget.
    kernel : RieszKernel, optional
        Precomputed kernel for ``grid`` and ``params.b``.
    seed : ndarray, optional
        Real initial guess; defaults to exp(-|x|²/2).

    Raises
    ------
    WrongRegime
        If s_c ≥ 1.
    NoConvergence
        If the residual is still above ``tol`` after ``max_iter`` steps.
    Divergence
        If the stabilising factor leaves [1e-6, 1e6].
    """
    if classify(params).s_c >= 1:
        raise WrongRegime("Petviashvili runs need s_c < 1; use explicit_critical_Q for s_c = 1")
    if kernel is None:
        kernel = riesz_kernel(grid, params.b)
    elif kernel.grid != grid or kernel.b != params.b:
        raise InvalidParams("kernel does not match grid or b")
    p = params.p
    sigma = (2 * p - 1) / (2 * p - 2)
    w = fft_workers()
    xi2 = grid.xi2[..., : grid.n // 2 + 1]
    sym = 1.0 + xi2
    dv = grid.cell_volume

    Q = np.exp(-0.5 * grid.r2) if seed is None else np.array(seed, dtype=float)
    history = []
    S = math.nan
    for it in range(1, max_iter + 1):
        absQ = np.abs(Q)
        NQ = riesz_convolve(kernel, absQ**p, boundary_warn=math.inf) * absQ ** (p - 2) * Q
        Qh = sfft.rfftn(Q, workers=w)
        NQh = sfft.rfftn(NQ, workers=w)
        res = sfft.irfftn(sym * Qh, s=grid.shape, workers=w) - NQ
        residual = math.sqrt(float(np.sum(res * res)) * dv)
        history.append(residual)
        if not math.isfinite(residual):
            raise Divergence("non-finite residual in Petviashvili iteration")
        num = float(np.sum(Q * sfft.irfftn(sym * Qh, s=grid.shape, workers=w)))
        den = float(np.sum(Q * NQ))
        S = num / den if den > 0 else math.inf
        if not (S_BOUNDS[0] <= S <= S_BOUNDS[1]):
            raise Divergence(f"stabilising factor S = {S:.3e} left {S_BOUNDS}")
        if residual <= tol:
            break
        Q = sfft.irfftn(S**sigma * NQh / sym, s=grid.shape, workers=w)
    else:
        raise NoConvergence(f"residual {residual:.3e} > tol {tol:.1e} after {max_iter} iterations")

    prof = ComplexField(grid, Q)
    G = float(np.sum(xi2 * _rfft_weights(grid) * np.abs(sfft.rfftn(Q, workers=w)) ** 2)) * dv / grid.n**grid.N
    M = float(np.sum(Q * Q)) * dv
    Z = float(np.sum(riesz_convolve(kernel, np.abs(Q) ** p, boundary_warn=math.inf) * np.abs(Q) ** p)) * dv
    return GroundStateResult(
        params=params,
        profile=prof,
        residual=residual,
        mass_Q=M,
        grad_sq_Q=G,
        z_Q=Z,
        c_gn=_weinstein(Z, G, M, params),
        iterations=it,
        stabilizer=S,
        tol=tol,
        history=history,
    )


def _rfft_weights(grid: Grid) -> np.ndarray:
    # half-spectrum multiplicities along the last axis
    m = grid.n // 2 + 1
    w = np.full(m, 2.0)
    w[0] = 1.0
    w[-1] = 1.0
    return w


def sharp_gn_constant(result: GroundStateResult) -> float:
    """Sharp constant of Z(u) ≤ C ‖∇u‖^{2 s_c (p-1) + 2} ‖u‖^{2 (1 - s_c)(p-1)}.

    Evaluated as the Weinstein quotient at Q, where the inequality is an
    equality. It differs from M[Q]^{-(p-1)} by the Pohozhaev factor
    (1 + r) / r^{k+1}, r = ‖∇Q‖²/‖Q‖².
    """
    if not result.converged or not (result.residual <= result.tol):
        raise UnconvergedInput("ground state did not reach its tolerance")
    return _weinstein(result.z_Q, result.grad_sq_Q, result.mass_Q, result.params)


def gn_denominator(c_gn: float, params: EquationParams) -> float:
    """‖Q‖^{(1-s_c)/s_c} ‖∇Q‖ recovered from the sharp constant."""
    k = params.k
    return (params.p / (c_gn * (k + 1))) ** (1 / (2 * k))


# -- energy-critical constants ---------------------------------------------

@dataclass(frozen=True)
class SharpConstants:
    c_gn: float
    c_sobolev: float
    c_hls: float
    grad_Q_sq_critical: float
    energy_Q_critical: float


def sobolev_constant(N: int) -> float:
    return (math.gamma(N) / math.gamma(N / 2)) ** (1 / N) / math.sqrt(N * (N - 2) * math.pi)


def hls_constant(N: int, b: float) -> float:
    return (
        math.pi ** (b / 2)
        * math.gamma((N - b) / 2)
        / math.gamma(N - b / 2)
        * (math.gamma(N) / math.gamma(N / 2)) ** (1 - b / N)
    )


def critical_constants(N: int, b: float) -> SharpConstants:
    """Closed-form sharp constants for the energy-critical power p = (2N - b)/(N - 2)."""
    if N < 3 or not (0 < b < N):
        raise InvalidParams(f"need N >= 3 and 0 < b < N, got N={N}, b={b}")
    cs = sobolev_constant(N)
    ch = hls_constant(N, b)
    c_gn = cs ** (2 * (2 * N - b) / (N - 2)) * ch
    grad = c_gn ** (-(N - 2) / 4)
    return SharpConstants(c_gn, cs, ch, grad, 2 * grad / (N + 2))


def _critical_gn_direct(N: int, b: float) -> float:
    g = math.gamma
    inner = (g(N) / g(N / 2)) ** ((N - b + 2) / (2 * N - b)) / (N * (N - 2) * math.pi)
    return math.pi ** (b / 2) * inner ** ((2 * N - b) / (N - 2)) * g((N - b) / 2) / g(N - b / 2)


@dataclass(frozen=True)
class CriticalProfile:
    """Q(r) = A (1 + r²)^{-(N-2)/2}, solving ΔQ + (|x|^{-(N-2)} * Q^p) Q^{p-1} = 0."""

    N: int
    amplitude: float

    @property
    def b(self) -> float:
        return self.N - 2.0

    @property
    def p(self) -> float:
        return (self.N + 2) / (self.N - 2)

    def __call__(self, r):
        return self.amplitude * (1 + np.asarray(r) ** 2) ** (-(self.N - 2) / 2)

    def derivative(self, r):
        r = np.asarray(r)
        return -(self.N - 2) * self.amplitude * r * (1 + r**2) ** (-self.N / 2)

    def laplacian(self, r):
        return -self.N * (self.N - 2) * self.amplitude * (1 + np.asarray(r) ** 2) ** (-(self.N + 2) / 2)

    def potential(self, r: float) -> float:
        return radial_potential(lambda s: float(self(s)) ** self.p, r, self.N, self.b)

    @property
    def mass(self):
        raise InvalidParams("the critical profile is not square integrable")

    def grad_sq(self) -> float:
        return radial_integral(lambda s: float(self.derivative(s)) ** 2, self.N)

    def z_value(self) -> float:
        return radial_integral(lambda s: self.potential(s) * float(self(s)) ** self.p, self.N)

    def residual(self, radii=None) -> float:
        """Relative r^{N-1}-weighted l² residual of the profile equation on sample radii."""
        if radii is None:
            radii = np.linspace(0.0, 20.0, 81)
        radii = np.asarray(radii, dtype=float)
        lap = self.laplacian(radii)
        nl = np.array([self.potential(r) for r in radii]) * self(radii) ** (self.p - 1)
        wgt = np.maximum(radii, radii[1] if radii.size > 1 else 1.0) ** (self.N - 1)
        return float(np.sqrt(np.sum(wgt * (lap + nl) ** 2) / np.sum(wgt * lap**2)))


def explicit_critical_Q(N: int) -> CriticalProfile:
    """Explicit energy-critical profile for b = N - 2."""
    if N < 3:
        raise InvalidParams(f"explicit profile needs N >= 3, got N={N}")
    amp = (N * (N - 2) / math.pi ** (N / 2) * math.gamma(1 + N / 2)) ** ((N - 2) / 8)
    return CriticalProfile(N, amp)
