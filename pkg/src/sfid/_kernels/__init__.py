"""Hot kernels with a compiled core and a pure-Python fallback.

The compiled module is used when it imports and ``SFID_PURE_PYTHON`` is not
set.  It works on 64-bit entries and signals overflow, in which case the call
is retried with the unbounded pure-Python kernel.
"""
import os

from . import _pure

try:
    if os.environ.get("SFID_PURE_PYTHON"):
        raise ImportError("pure-Python kernels forced")
    from . import _ext
except ImportError:
    _ext = None

BACKEND = "cython" if _ext is not None else "python"


def _dispatch(name, re, im):
    if _ext is not None:
        try:
            return getattr(_ext, name)(re, im)
        except OverflowError:
            pass
    return getattr(_pure, name)(re, im)


def gauss_int_rank(re, im):
    return _dispatch("gauss_int_rank", re, im)


def gauss_int_kruskal(re, im):
    return _dispatch("gauss_int_kruskal", re, im)
