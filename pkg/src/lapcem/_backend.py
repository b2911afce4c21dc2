"""Select the numba or pure-numpy kernel path.

Set ``LAPCEM_DISABLE_NUMBA=1`` before importing :mod:`lapcem` to force the
numpy fallback.  The fallback is also used when numba cannot be imported.
"""

import os
import warnings

_FALSY = {"", "0", "false", "no", "off"}


def _env_disabled() -> bool:
    return os.environ.get("LAPCEM_DISABLE_NUMBA", "").strip().lower() not in _FALSY


try:
    import numba  # noqa: F401

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and not _env_disabled()

if not HAS_NUMBA and not _env_disabled():  # pragma: no cover
    warnings.warn("numba is not available, using the numpy kernels", RuntimeWarning)


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
