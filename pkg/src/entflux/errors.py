"""Exception types raised across the package."""


class EntfluxError(Exception):
    """Base class for all package errors."""


class InvalidStateError(EntfluxError):
    """A density matrix, pure state, or unitary failed its invariants."""


class UndefinedVisibilityError(EntfluxError):
    """Visibility requested with zero total coincidence rate (A + C = 0)."""


class NoEntanglementError(EntfluxError):
    """Noise parameters admit no entangled operating point (boundary fails)."""


class InfeasibleConstraintError(EntfluxError):
    """A fidelity floor exceeds the link's maximum achievable fidelity."""


class AllocationTooLargeError(EntfluxError):
    """Exhaustive enumeration refused: allocation space above the cap."""


class ScenarioFormatError(EntfluxError):
    """A scenario file failed to parse or violated a scenario invariant."""
