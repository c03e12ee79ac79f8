"""Backend selection for the compiled kernels.

Set ``TRUTHY_NUMBA=0`` in the environment to force the pure numpy/scipy path.
When numba is not importable the numpy path is used regardless of the flag.
"""

from __future__ import annotations

import contextlib
import os
from typing import Iterator

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAVE_NUMBA = False

ENV_FLAG = "TRUTHY_NUMBA"
BACKENDS = ("numba", "numpy")


def _requested() -> bool:
    return os.environ.get(ENV_FLAG, "1").strip().lower() not in {"0", "false", "no", "off"}


_backend = "numba" if HAVE_NUMBA and _requested() else "numpy"


def njit(func):
    """``numba.njit`` with the package's options, or the identity without numba."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}; expected one of {BACKENDS}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    _backend = name


@contextlib.contextmanager
def use_backend(name: str) -> Iterator[None]:
    previous = _backend
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)
