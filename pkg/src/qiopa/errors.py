"""Exception types shared across the package."""


class ConvergenceError(RuntimeError):
    """The automatic Fock-cutoff search exceeded its hard index bound."""


class DegenerateEventError(RuntimeError):
    """The requested post-selection event has probability zero."""


class NonPhysicalStateError(ValueError):
    """A matrix violates positivity beyond the accepted tolerance."""
