"""Numerical backend selection for the hot kernels.

The ensemble Monte Carlo core spends essentially all of its time in a few
per-shot operations (pair-separation histograms, phasor profiles, cosine
transform evaluation). Each of those exists twice in kernels.py: as a numba
@njit loop and as a vectorized pure-numpy routine. Which implementation the
public kernel names point at is decided once, at import time:

    LATTICETOF_BACKEND=numba    force the numba path (error if not importable)
    LATTICETOF_BACKEND=numpy    force the pure-numpy path
    unset                       numba when importable, numpy otherwise

Both implementations stay importable regardless of the active choice so that
equivalence tests and benchmarks/bench_backends.py can compare them.
"""

import os

ENV_VAR = "LATTICETOF_BACKEND"


def _numba_importable() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


NUMBA_AVAILABLE = _numba_importable()


def _select() -> str:
    requested = os.environ.get(ENV_VAR, "").strip().lower()
    if requested not in ("", "numba", "numpy"):
        raise RuntimeError(
            f"{ENV_VAR} must be 'numba' or 'numpy', got {requested!r}"
        )
    if requested == "numpy":
        return "numpy"
    if requested == "numba":
        if not NUMBA_AVAILABLE:
            raise RuntimeError(f"{ENV_VAR}=numba but numba is not importable")
        return "numba"
    return "numba" if NUMBA_AVAILABLE else "numpy"


ACTIVE = _select()
