"""Kernel-compilation switch.

Hot numeric kernels are written as njit-compatible functions and compiled
with numba by default. Setting the environment variable LAMBDAQ_NO_NUMBA=1
(or running on an interpreter without numba) selects the pure-Python/numpy
fallback path instead; results are identical, only slower.
"""
import os


def _numba_requested() -> bool:
    flag = os.environ.get("LAMBDAQ_NO_NUMBA", "").strip().lower()
    return flag not in ("1", "true", "yes")


NUMBA_ENABLED = False
if _numba_requested():
    try:
        import numba  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False


def maybe_njit(*args, **kwargs):
    """@njit when numba is active, identity decorator otherwise."""
    if NUMBA_ENABLED:
        from numba import njit

        kwargs.setdefault("cache", True)
        return njit(*args, **kwargs)
    if args and callable(args[0]):
        return args[0]

    def deco(fn):
        return fn

    return deco
