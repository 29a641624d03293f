"""Backend selection for the transport kernels.

The compiled extension is used when it imports; set
``CTAUTOMATON_PURE_PYTHON=1`` to force the numpy fallback.
"""

from __future__ import annotations

import importlib
import os
from types import ModuleType

from . import _kernels_py


def _load_compiled() -> ModuleType | None:
    try:
        return importlib.import_module("ctautomaton._kernels")
    except ImportError:
        return None


_compiled = _load_compiled()

if _compiled is not None and os.environ.get("CTAUTOMATON_PURE_PYTHON") != "1":
    _impl: ModuleType = _compiled
    BACKEND = "cython"
else:
    _impl = _kernels_py
    BACKEND = "python"


def available_backends() -> list[str]:
    return ["python"] + (["cython"] if _compiled is not None else [])


def get_backend(name: str | None = None) -> ModuleType:
    if name is None:
        return _impl
    if name == "python":
        return _kernels_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown kernel backend {name!r}")


propagator_sum = _impl.propagator_sum
f_cosine_sum = _impl.f_cosine_sum
p1_double_sum = _impl.p1_double_sum
