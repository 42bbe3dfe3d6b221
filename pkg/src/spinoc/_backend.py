"""Pick the compiled kernels when available, else the numpy twin.

Set ``SPINOC_PURE_PYTHON=1`` to force the fallback.
"""

import importlib
import logging
import os

log = logging.getLogger(__name__)

BACKENDS = ("compiled", "python")


def load(name: str):
    if name == "compiled":
        return importlib.import_module("spinoc._kernels")
    if name == "python":
        return importlib.import_module("spinoc._kernels_py")
    raise ValueError(f"unknown kernel backend {name!r}")


def available() -> list:
    out = []
    for name in BACKENDS:
        try:
            load(name)
        except ImportError:
            continue
        out.append(name)
    return out


def _select():
    if os.environ.get("SPINOC_PURE_PYTHON", "") not in ("", "0"):
        return "python", load("python")
    try:
        return "compiled", load("compiled")
    except ImportError:
        log.info("compiled kernels unavailable, using numpy fallback")
        return "python", load("python")


NAME, kernels = _select()
