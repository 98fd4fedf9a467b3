"""Equation parameters, criticality classification and exponent bookkeeping.

The focusing generalized Hartree equation is

    i u_t + Δu + (|x|^{-b} * |u|^p) |u|^{p-2} u = 0,   x ∈ R^N,

with p ≥ 2 and 0 < b < N. Everything else in the package is keyed on the
triple (N, p, b) held by :class:`EquationParams`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import InvalidParams, OutOfRange

#: tolerance used to snap s_c onto the mass/energy-critical boundaries
CRITICAL_TOL = 1e-12


class Criticality(str, enum.Enum):
    MASS_SUBCRITICAL = "mass-subcritical"
    MASS_CRITICAL = "mass-critical"
    INTERCRITICAL = "intercritical"
    ENERGY_CRITICAL = "energy-critical"
    ENERGY_SUPERCRITICAL = "energy-supercritical"


@dataclass(frozen=True)
class EquationParams:
    """Dimension ``N``, power ``p`` and Riesz exponent ``b``."""

    N: int
    p: float
    b: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise InvalidParams(f"dimension must be a positive integer, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "b", float(self.b))
        if not math.isfinite(self.p) or self.p < 2:
            raise InvalidParams(f"need p >= 2, got p={self.p}")
        if not (0 < self.b < self.N):
            raise InvalidParams(f"need 0 < b < N, got b={self.b}, N={self.N}")

    @property
    def s_c(self) -> float:
        return scaling_index(self)

    @property
    def k(self) -> float:
        """k = s_c (p - 1), the virial coefficient."""
        return self.s_c * (self.p - 1)

    @property
    def scaling_exponent(self) -> float:
        """Amplitude exponent (N - b + 2) / (2(p - 1)) of the scaling symmetry."""
        return (self.N - self.b + 2) / (2 * (self.p - 1))

    def as_dict(self) -> dict:
        return {"N": self.N, "p": self.p, "b": self.b}


@dataclass(frozen=True)
class CriticalityReport:
    s_c: float
    criticality: Criticality
    k: float
    alpha: float
    lwp_regularity_ok: bool
    a1_exponent_ok: bool

    def as_dict(self) -> dict:
        return {
            "s_c": self.s_c,
            "class": self.criticality.value,
            "k": self.k,
            "alpha": self.alpha,
            "lwp_regularity_ok": self.lwp_regularity_ok,
            "a1_exponent_ok": self.a1_exponent_ok,
        }


@dataclass(frozen=True)
class AdmissiblePair:
    q: float
    r: float
    q_dual: float
    r_dual: float


def scaling_index(params: EquationParams) -> float:
    """Critical Sobolev index s_c = N/2 - (N - b + 2) / (2(p - 1))."""
    return params.N / 2 - params.scaling_exponent


def _is_even_integer(x: float) -> bool:
    return float(x).is_integer() and int(x) % 2 == 0


def classify(params: EquationParams) -> CriticalityReport:
    s_c = scaling_index(params)
    if abs(s_c) <= CRITICAL_TOL:
        s_c, cls = 0.0, Criticality.MASS_CRITICAL
    elif abs(s_c - 1) <= CRITICAL_TOL:
        s_c, cls = 1.0, Criticality.ENERGY_CRITICAL
    elif s_c < 0:
        cls = Criticality.MASS_SUBCRITICAL
    elif s_c < 1:
        cls = Criticality.INTERCRITICAL
    else:
        cls = Criticality.ENERGY_SUPERCRITICAL
    k = s_c * (params.p - 1)
    lwp_ok = True if _is_even_integer(params.p) else s_c < params.p - 1
    return CriticalityReport(
        s_c=s_c,
        criticality=cls,
        k=k,
        alpha=k / 2,
        lwp_regularity_ok=lwp_ok,
        a1_exponent_ok=params.b + s_c < params.N,
    )


def is_admissible(q: float, r: float, N: int, tol: float = 1e-14) -> bool:
    if not (2 <= q <= math.inf and 2 <= r <= math.inf):
        return False
    if (q, r, N) == (2, math.inf, 2):
        return False
    return abs(2 / q + N / r - N / 2) <= tol * max(1.0, N / 2)


def canonical_pair(params: EquationParams) -> AdmissiblePair:
    """The L^2-admissible pair (2p, 2Np/(Np - 2)) used in the local theory."""
    N, p = params.N, params.p
    if N * p <= 2:
        raise InvalidParams(f"need N p > 2, got N p = {N * p}")
    q = 2 * p
    r = 2 * N * p / (N * p - 2)
    if not is_admissible(q, r, N):
        raise AssertionError(f"pair ({q}, {r}) failed the admissibility identity")
    return AdmissiblePair(q=q, r=r, q_dual=q / (q - 1), r_dual=r / (r - 1))


def hls_partner_exponent(r2: float, params: EquationParams) -> float:
    """Solve 1/r2 + b/N = 1 + 1/r1 for the Hardy-Littlewood-Sobolev exponent r1."""
    if not (1 < r2 < math.inf):
        raise OutOfRange(f"need 1 < r2 < inf, got {r2}")
    inv_r1 = 1 / r2 + params.b / params.N - 1
    if not (0 < inv_r1 < 1):
        raise OutOfRange(f"solved 1/r1 = {inv_r1} leaves (0, 1); no exponent r1 in (1, inf)")
    return 1 / inv_r1
