"""Exception types shared across the package.

The CLI maps these onto exit codes: InputError -> 2, ResourceError -> 3,
InvariantViolation -> 4.
"""


class InputError(ValueError):
    """Caller supplied an invalid graph, operator, parameter, or file."""


class ResourceError(RuntimeError):
    """The requested computation exceeds the configured size limits."""


class InvariantViolation(RuntimeError):
    """A mathematical invariant that should always hold was violated."""


class NotFrustrationFree(InputError):
    """The Hamiltonian has no zero-energy state at the requested tolerance."""


class DegenerateSpectrum(InputError):
    """The spectrum has no gap to report (e.g. H = 0)."""
