"""Backend selection for the hot loops.

Kernels are compiled with numba when it is importable, unless the environment
variable ``RGBDSEG_NO_NUMBA`` is set to a truthy value, in which case the
pure numpy / python implementations are used instead. Both paths are always
importable so they can be compared side by side (see ``benchmarks/``).
"""

import os

_FLAG = os.environ.get("RGBDSEG_NO_NUMBA", "").strip().lower()

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _FLAG in ("", "0", "false", "no")
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(fn):
    """Compile ``fn`` in nopython mode, or return it untouched without numba."""
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


def pick(numba_impl, numpy_impl):
    return numba_impl if USE_NUMBA else numpy_impl
