"""Elimination kernel dispatch.

The compiled extension is used when it importable; setting the environment
variable ``FPT_PURE_PYTHON=1`` forces the pure-Python twin. Both backends
implement identical semantics (see `pure` for the contract).
"""

from __future__ import annotations

import os

from . import pure

if os.environ.get("FPT_PURE_PYTHON") == "1":
    _impl = pure
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = pure

rref_int = _impl.rref_int
rref_mod = _impl.rref_mod
det_int = _impl.det_int
det_mod = _impl.det_mod


def backend_name() -> str:
    return _impl.BACKEND


def backends():
    """Names of all importable backends, for cross-checking and benchmarks."""
    return [module.BACKEND for module in backend_modules()]


def backend_modules():
    """All importable backend modules, in (pure, compiled) order."""
    found = [pure]
    try:
        from . import _speedups
    except ImportError:
        pass
    else:
        found.append(_speedups)
    return found
