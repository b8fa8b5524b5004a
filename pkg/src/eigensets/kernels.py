"""Backend selection for the geometry kernels.

The compiled extension is used when it imports; set
``EIGENSETS_BACKEND=python`` to force the numpy implementation.
"""

import os

from . import _kernels_py

__all__ = ["BACKEND", "rasterize", "radial_at", "directed_hausdorff", "get_backend"]


def get_backend(name):
    """Return the kernel module for ``"python"`` or ``"cython"``."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


def _select():
    wanted = os.environ.get("EIGENSETS_BACKEND", "auto").lower()
    if wanted == "python":
        return "python", _kernels_py
    try:
        return "cython", get_backend("cython")
    except ImportError:
        if wanted == "cython":
            raise
        return "python", _kernels_py


BACKEND, _impl = _select()
rasterize = _impl.rasterize
radial_at = _impl.radial_at
directed_hausdorff = _impl.directed_hausdorff
