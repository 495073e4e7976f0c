"""Selects the compiled path kernels when available.

Set ``KDVTAU_PURE_PYTHON=1`` to force the NumPy fallback.
"""

import os

from . import _paths_py

NAME = "numpy"
kernels = _paths_py

if os.environ.get("KDVTAU_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _paths as _compiled
    except ImportError:
        pass
    else:
        kernels = _compiled
        NAME = "cython"

ou_quadratic_integral = kernels.ou_quadratic_integral
levy_area = kernels.levy_area


def available():
    """Names of the backends importable in this environment."""
    names = ["numpy"]
    try:
        from . import _paths  # noqa: F401
    except ImportError:
        return names
    return ["cython"] + names
