"""Backend selection for the Monte Carlo sweep kernels.

Imports the compiled Cython core when available and falls back to the
pure-Python implementation otherwise.  Set GHZMC_FORCE_PYTHON_KERNELS=1 to
force the fallback (used by tests and the kernel benchmark).
"""

import os

if os.environ.get("GHZMC_FORCE_PYTHON_KERNELS"):
    from . import _mc_fallback as _impl
else:
    try:
        from . import _mc_kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _mc_fallback as _impl

BACKEND = _impl.BACKEND
metropolis_sweeps = _impl.metropolis_sweeps
wolff_updates = _impl.wolff_updates


def load_backend(name: str):
    """Return the named kernel module ('cython' or 'python'), for benchmarks."""
    if name == "python":
        from . import _mc_fallback

        return _mc_fallback
    if name == "cython":
        from . import _mc_kernels  # type: ignore[attr-defined]

        return _mc_kernels
    raise ValueError(f"unknown kernel backend {name!r}")
