"""Select the compiled pointwise kernels when available.

Set ``GHARTREE_BACKEND=python`` to force the numpy fallback.
"""
import os

BACKEND = "python"
if os.environ.get("GHARTREE_BACKEND", "").lower() != "python":
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = None
else:
    _impl = None

if _impl is None:
    from . import _pykernels as _impl

abs_pow = _impl.abs_pow
veff = _impl.veff
potential_term = _impl.potential_term
phase_rotate = _impl.phase_rotate
