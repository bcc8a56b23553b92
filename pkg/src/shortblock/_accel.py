"""Numba switch.

Hot kernels are written twice: a ``@njit`` loop version and a pure numpy
version.  The numba path is used when numba imports and the environment
variable ``SHORTBLOCK_DISABLE_NUMBA`` is unset (or ``0``).
"""
import os

_flag = os.environ.get("SHORTBLOCK_DISABLE_NUMBA", "0").strip().lower()
DISABLED_BY_ENV = _flag not in ("", "0", "false", "no", "off")

try:
    from numba import njit as _numba_njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba_njit = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not DISABLED_BY_ENV


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity decorator otherwise.

    Kernels are always compiled when numba exists so that the benchmark and
    the test-suite can exercise both paths in one process; ``USE_NUMBA``
    only controls which one the public functions dispatch to.
    """
    if HAVE_NUMBA:
        return _numba_njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def decorator(func):
        return func

    return decorator


def backend():
    return "numba" if USE_NUMBA else "numpy"
