"""Select the kernel implementation at import time.

The compiled extension is preferred. Setting the environment variable
``CCISTAT_PURE_PYTHON=1`` forces the NumPy fallback, which is also used
whenever the extension was not built.
"""

import os

if os.environ.get("CCISTAT_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as kernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as kernels
        BACKEND = "python"

__all__ = ["kernels", "BACKEND"]
