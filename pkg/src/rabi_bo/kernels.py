"""Backend selection for the numerical hot loops.

The compiled extension ``rabi_bo._kernels`` is used when it imports; otherwise
the numpy implementation in ``rabi_bo._kernels_py`` is used. Setting the
environment variable ``RABI_BO_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _kernels_py

POISSON, GUE, GOE = _kernels_py.POISSON, _kernels_py.GUE, _kernels_py.GOE

_impl = _kernels_py
BACKEND = "python"

if os.environ.get("RABI_BO_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

hermite_table = _impl.hermite_table
shape_values = _impl.shape_values
family_rss = _impl.family_rss


def backends():
    """Map of available backend names to kernel modules."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels as compiled
    except ImportError:
        return out
    out["cython"] = compiled
    return out
