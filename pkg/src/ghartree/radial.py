"""One-dimensional radial quadrature for Riesz potentials of radial functions.

Used to verify profiles that decay too slowly for a Cartesian box. For
b = N - 2 the shell average of |x - y|^{-b} is max(r, s)^{-b} (Newton's
theorem); in 3d with general b it is

    ((r + s)^{2-b} - |r - s|^{2-b}) / (2 (2 - b) r s).
"""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from .errors import InvalidParams
from .riesz import sphere_area

_QUAD = dict(limit=500, epsabs=0.0, epsrel=1e-13)


def _shell_average(N: int, b: float, r: float, s: float) -> float:
    if abs(b - (N - 2)) < 1e-15:
        return max(r, s) ** (-b)
    if N != 3:
        raise InvalidParams("radial potential needs b = N - 2 outside 3d")
    if r == 0 or s == 0:
        return max(r, s) ** (-b)
    if b == 2:
        return math.log((r + s) / abs(r - s)) / (2 * r * s) if r != s else math.inf
    return ((r + s) ** (2 - b) - abs(r - s) ** (2 - b)) / (2 * (2 - b) * r * s)


def radial_potential(g, r: float, N: int, b: float) -> float:
    """(|x|^{-b} * g)(r) for a radial density ``g(s)`` that is integrable on [0, ∞)."""
    area = sphere_area(N)
    if abs(b - (N - 2)) < 1e-15:
        inner = integrate.quad(lambda s: g(s) * s ** (N - 1), 0, r, **_QUAD)[0] if r > 0 else 0.0
        outer = integrate.quad(lambda s: g(s) * s, r, np.inf, **_QUAD)[0]
        return area * (inner * r ** (2 - N) + outer) if r > 0 else area * outer
    f = lambda s: g(s) * s * s * _shell_average(N, b, r, s)
    head = integrate.quad(f, 0, 2 * r + 1, points=[r] if r > 0 else None, **_QUAD)[0]
    tail = integrate.quad(f, 2 * r + 1, np.inf, **_QUAD)[0]
    return area * (head + tail)


def radial_integral(f, N: int) -> float:
    """∫_{R^N} f(|x|) dx."""
    val = integrate.quad(lambda s: f(s) * s ** (N - 1), 0, 1, **_QUAD)[0]
    val += integrate.quad(lambda s: f(s) * s ** (N - 1), 1, np.inf, **_QUAD)[0]
    return sphere_area(N) * val
