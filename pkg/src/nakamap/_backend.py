"""Selects the estimation-kernel backend at import time.

The compiled extension is preferred; the pure-Python module is the fallback
and the reference.  Both produce bitwise identical results (see the module
docstrings), so the choice only affects speed.  Set ``NAKAMAP_PURE_PYTHON=1``
to force the fallback, e.g. to benchmark one against the other.
"""

import os

if os.environ.get("NAKAMAP_PURE_PYTHON"):
    from . import _kernels_py as kernels
    COMPILED = False
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
        COMPILED = True
    except ImportError:
        from . import _kernels_py as kernels
        COMPILED = False


def backend_name():
    """'compiled' or 'python', whichever is active."""
    return kernels.backend_name()
