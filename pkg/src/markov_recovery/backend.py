"""Kernel backend selection.

MARKOV_RECOVERY_BACKEND controls which kernel set runs:
  auto  (default) numba if importable, else numpy
  numba           require the jit kernels
  numpy           force the pure-numpy path

Resolved once at import time. Both backends implement the same contracts;
pick explicitly when benchmarking (see benchmarks/bench_backends.py).
"""

import os

_ENV_VAR = "MARKOV_RECOVERY_BACKEND"
_CHOICES = ("auto", "numba", "numpy")


def _resolve() -> str:
    choice = os.environ.get(_ENV_VAR, "auto").strip().lower()
    if choice not in _CHOICES:
        raise RuntimeError(f"{_ENV_VAR} must be one of {_CHOICES}, got {choice!r}")
    if choice == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if choice == "numba":
            raise
        return "numpy"
    return "numba"


BACKEND = _resolve()

if BACKEND == "numba":
    from ._kernels_numba import (  # noqa: F401
        conditional_entropy_batch,
        hermitian_eigh,
        hermitian_eigvals,
    )
else:
    from ._kernels_numpy import (  # noqa: F401
        conditional_entropy_batch,
        hermitian_eigh,
        hermitian_eigvals,
    )
