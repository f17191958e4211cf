"""Honour ``SBM_IDENT_THREADS`` by capping BLAS/OpenMP pools.

Must run before numpy is first imported, so the package imports it first.
"""

import os

_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "BLIS_NUM_THREADS")


def apply_thread_cap() -> None:
    cap = os.environ.get("SBM_IDENT_THREADS")
    if not cap:
        return
    if not cap.isdigit() or int(cap) < 1:
        raise ValueError(f"SBM_IDENT_THREADS must be a positive integer, got {cap!r}")
    for var in _VARS:
        os.environ[var] = cap
