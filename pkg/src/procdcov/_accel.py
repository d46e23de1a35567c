"""Backend selection for the hot numeric kernels.

Every hot kernel ships in two flavours: a numba ``@njit`` version and a
pure-numpy version.  Numba is used when it is importable and the
environment variable ``PROCDCOV_DISABLE_NUMBA`` is unset (or ``0``).
"""
from __future__ import annotations

import contextlib
import os
from typing import Iterator

try:
    import numba

    HAVE_NUMBA = True
    if "NUMBA_THREADING_LAYER" not in os.environ:
        # omp first: threadsafe, and skips probing an outdated TBB
        numba.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]
except ImportError:  # pragma: no cover - numba is a hard dependency
    numba = None
    HAVE_NUMBA = False

_FALSY = {"", "0", "false", "no", "off"}


def _numba_from_env() -> bool:
    flag = os.environ.get("PROCDCOV_DISABLE_NUMBA", "").strip().lower()
    return HAVE_NUMBA and flag in _FALSY


_use_numba = _numba_from_env()


def numba_enabled() -> bool:
    """Whether dispatching functions route to the numba kernels."""
    return _use_numba


def backend_name() -> str:
    return "numba" if _use_numba else "numpy"


@contextlib.contextmanager
def use_backend(name: str) -> Iterator[None]:
    """Temporarily force ``"numba"`` or ``"numpy"`` kernels."""
    global _use_numba
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    previous = _use_numba
    _use_numba = name == "numba"
    try:
        yield
    finally:
        _use_numba = previous


def njit(*args, **kwargs):
    """``numba.njit`` when numba is installed, otherwise the identity."""
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)

    def wrap(func):
        return func

    if args and callable(args[0]):
        return args[0]
    return wrap


@contextlib.contextmanager
def numba_threads(workers: int | None) -> Iterator[None]:
    """Run numba parallel regions with ``workers`` threads."""
    if not HAVE_NUMBA or workers is None:
        yield
        return
    previous = numba.get_num_threads()
    numba.set_num_threads(max(1, min(int(workers), numba.config.NUMBA_NUM_THREADS)))
    try:
        yield
    finally:
        numba.set_num_threads(previous)
