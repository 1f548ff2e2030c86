"""Negativity, LOCC recovery, and CMI of thermally dephased GHZ states.

Monte Carlo estimators (importance-sampled, bounded observables) backed by a
compiled sweep kernel, plus an exact small-system oracle that validates every
closed-form identity the estimators rely on.
"""

__version__ = "0.1.0"

from .kernels import BACKEND as kernel_backend  # noqa: F401
