"""Selects the compiled kernel when available, else the NumPy fallback.

Set ``PLASTIC_QCA_BACKEND=python`` to force the fallback.
"""

import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

KERNELS = {"python": _kernels_py.apply_local}
if _compiled is not None:
    KERNELS["cython"] = _compiled.apply_local

_requested = os.environ.get("PLASTIC_QCA_BACKEND", "").strip().lower()
if _requested:
    if _requested not in KERNELS:
        raise ImportError(f"PLASTIC_QCA_BACKEND={_requested!r} is not available; have {sorted(KERNELS)}")
    BACKEND = _requested
else:
    BACKEND = "cython" if "cython" in KERNELS else "python"

apply_local = KERNELS[BACKEND]


def get_kernel(name: str):
    try:
        return KERNELS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} not available; have {sorted(KERNELS)}") from None
