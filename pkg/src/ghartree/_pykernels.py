"""Pure-numpy implementations of the pointwise hot loops.

Reference semantics for the compiled ``_ckernels`` module; both must agree
to round-off.
"""
import numpy as np


def abs_pow(u, p):
    """|u|^p as a float64 array."""
    a2 = u.real * u.real + u.imag * u.imag
    if p == 2:
        return a2
    return a2 ** (0.5 * p)


def veff(u, V, p):
    """Effective real potential V |u|^{p-2}."""
    if p == 2:
        return np.array(V, dtype=float, copy=True)
    a2 = u.real * u.real + u.imag * u.imag
    return V * a2 ** (0.5 * (p - 2))


def potential_term(u, V, p):
    """V |u|^{p-2} u."""
    return veff(u, V, p) * u


def phase_rotate(u, V, p, dt):
    """In place u <- exp(i dt V |u|^{p-2}) u; returns max |V |u|^{p-2}|."""
    w = veff(u, V, p)
    vmax = float(np.max(np.abs(w))) if w.size else 0.0
    w *= dt
    u *= np.cos(w) + 1j * np.sin(w)
    return vmax
