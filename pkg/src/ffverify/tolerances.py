"""Numeric cutoffs used throughout the package.

The underlying statements are exact; floating point needs explicit
thresholds, collected here so every module classifies the same way.
"""

import os

# Hermiticity / projector validation
HERMITIAN_TOL = 1e-10
PROJECTOR_TOL = 1e-10

# ||[P_j, P_k]|| above this counts as "does not commute"
COMMUTE_TOL = 1e-10

# singular values >= 1 - UNIT_SV_TOL are treated as exactly 1
UNIT_SV_TOL = 1e-9

# eigenvalues below this belong to the ground cluster
GROUND_TOL = 1e-9

# eigenvalue classification for {0, 1} spectra
ZERO_ONE_TOL = 1e-10

# eigenvalue clustering when building total-spin subspace projectors
SPIN_CLUSTER_TOL = 1e-8

UNIT_VECTOR_TOL = 1e-12
PROB_SUM_TOL = 1e-12

# instances with Hilbert dimension above this are refused outright
DEFAULT_MAX_DIM = 8192

# dense eigendecomposition below this dimension, Krylov iteration above
DENSE_EIG_LIMIT = 1500


def max_dim() -> int:
    """Hard cap on Hilbert-space dimension, overridable via FFV_MAX_DIM."""
    value = os.environ.get("FFV_MAX_DIM")
    if value is None:
        return DEFAULT_MAX_DIM
    try:
        parsed = int(value)
    except ValueError:
        raise ValueError(f"FFV_MAX_DIM must be an integer, got {value!r}")
    if parsed <= 0:
        raise ValueError("FFV_MAX_DIM must be positive")
    return parsed
