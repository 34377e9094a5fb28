"""Split-scan kernels with a compiled fast path and a pure-Python fallback.

The compiled extension is preferred when importable; set COVERML_PURE_PYTHON=1
to force the fallback. Both backends are contract-identical (see the parity
tests); `benchmarks/kernel_bench.py` compares their throughput.
"""

from __future__ import annotations

import os
from contextlib import contextmanager
from types import ModuleType

from . import _fallback

try:
    from . import _speedups
except ImportError:
    _speedups = None

if _speedups is not None and os.environ.get("COVERML_PURE_PYTHON", "") != "1":
    _active: ModuleType = _speedups
else:
    _active = _fallback


def backend_name() -> str:
    """Name of the backend currently answering split queries."""
    return _active.BACKEND


def available_backends() -> tuple[str, ...]:
    return ("python",) if _speedups is None else ("python", "compiled")


def get_backend(name: str) -> ModuleType:
    if name == "python":
        return _fallback
    if name == "compiled":
        if _speedups is None:
            raise RuntimeError("compiled kernel extension is not available")
        return _speedups
    raise ValueError(f"unknown kernel backend {name!r}")


@contextmanager
def use_backend(name: str):
    """Temporarily route split queries through the named backend."""
    global _active
    previous = _active
    _active = get_backend(name)
    try:
        yield
    finally:
        _active = previous


def best_split_gini(x, y):
    return _active.best_split_gini(x, y)


def best_split_sse(x, y):
    return _active.best_split_sse(x, y)
