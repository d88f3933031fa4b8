"""Kernel backend selection.

The compiled extension is preferred when importable; the pure-Python module
is the fallback. ``FLOODMOB_KERNELS=python`` (or ``compiled``) forces a
backend, and tests/benchmarks may swap at runtime via :func:`use_backend`.
Both backends implement the same function set with bit-identical results.
"""

from __future__ import annotations

import importlib
import logging
import os

log = logging.getLogger(__name__)

_BACKENDS = {
    "compiled": "floodmob.geo._kernels",
    "python": "floodmob.geo._kernels_py",
}


def _load(name: str):
    return importlib.import_module(_BACKENDS[name])


def available_backends() -> list[str]:
    names = []
    for name in _BACKENDS:
        try:
            _load(name)
            names.append(name)
        except ImportError:
            continue
    return names


def _select_initial():
    forced = os.environ.get("FLOODMOB_KERNELS")
    if forced:
        if forced not in _BACKENDS:
            raise ValueError(
                f"FLOODMOB_KERNELS must be one of {sorted(_BACKENDS)}, got {forced!r}"
            )
        return forced, _load(forced)
    try:
        return "compiled", _load("compiled")
    except ImportError:
        log.debug("compiled kernels unavailable; using pure-Python fallback")
        return "python", _load("python")


_backend_name, impl = _select_initial()


def use_backend(name: str):
    """Swap the active kernel backend (mainly for tests and benchmarks)."""
    global _backend_name, impl
    impl = _load(name)
    _backend_name = name
    return impl


def current_backend() -> str:
    return _backend_name
