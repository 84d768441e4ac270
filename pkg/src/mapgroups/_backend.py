"""Pick the kernel implementation once, at import time.

The compiled module is preferred. Setting ``MAPGROUPS_PURE_PYTHON=1`` forces
the numpy fallback, which is also used when the extension was not built.
"""

import os

if os.environ.get("MAPGROUPS_PURE_PYTHON", "") not in ("", "0"):
    from mapgroups import _pykernels as kernels
else:
    try:
        from mapgroups import _ckernels as kernels
    except ImportError:
        from mapgroups import _pykernels as kernels

BACKEND = "cython" if kernels.__name__.endswith("_ckernels") else "python"

__all__ = ["kernels", "BACKEND"]
