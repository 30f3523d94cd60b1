"""Sweep-kernel backend selection.

The compiled extension is used when the build produced it; otherwise the
numpy fallback takes over with identical semantics. `effectsched bench`
compares the two.
"""

from . import _sweeps_py

try:
    from . import _sweeps as _compiled
except ImportError:  # extension not built on this platform
    _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"
_active = _compiled if _compiled is not None else _sweeps_py


def backend_module(name=None):
    """Return a kernel module by name ("compiled"/"python"), or the active one."""
    if name is None:
        return _active
    if name == "python":
        return _sweeps_py
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled sweep kernels are not available")
        return _compiled
    raise ValueError(f"unknown kernel backend {name!r}")


def vi_sweep(*args):
    _active.vi_sweep(*args)


def policy_sweep(*args):
    _active.policy_sweep(*args)
