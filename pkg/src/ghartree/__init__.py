"""Numerical laboratory for the focusing generalized Hartree equation

    i u_t + Δu + (|x|^{-b} * |u|^p) |u|^{p-2} u = 0.
"""
__version__ = "0.1.0"

from ._backend import BACKEND
from .eqparams import Criticality, EquationParams, classify
from .grid import ComplexField, Grid
from .riesz import RieszKernel, riesz_convolve, riesz_kernel

__all__ = [
    "BACKEND",
    "ComplexField",
    "Criticality",
    "EquationParams",
    "Grid",
    "RieszKernel",
    "__version__",
    "classify",
    "riesz_convolve",
    "riesz_kernel",
]
