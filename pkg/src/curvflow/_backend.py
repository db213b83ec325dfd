"""Kernel selection: the compiled extension when importable, numpy otherwise.

Set ``CURVFLOW_BACKEND=python`` to force the fallback.
"""
import importlib
import logging
import os

log = logging.getLogger(__name__)

_cache = {}


def available():
    """Names of the backends that can be loaded here."""
    names = ["python"]
    try:
        importlib.import_module("curvflow._ckernels")
    except ImportError:
        pass
    else:
        names.insert(0, "compiled")
    return names


def kernels(name=None):
    """Return the kernel module for ``name`` (``"compiled"``, ``"python"`` or None for default)."""
    if name is None:
        name = os.environ.get("CURVFLOW_BACKEND", "auto")
    if name in _cache:
        return _cache[name]
    if name in ("auto", "compiled"):
        try:
            mod = importlib.import_module("curvflow._ckernels")
        except ImportError:
            if name == "compiled":
                raise
            log.info("compiled kernels unavailable, using the numpy fallback")
            mod = importlib.import_module("curvflow._pykernels")
    elif name == "python":
        mod = importlib.import_module("curvflow._pykernels")
    else:
        raise ValueError(f"unknown backend {name!r}")
    _cache[name] = mod
    return mod


def active():
    mod = kernels()
    return "compiled" if mod.__name__.endswith("_ckernels") else "python"
