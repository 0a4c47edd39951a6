"""Exception types shared across the package."""


class HybridTeleportError(Exception):
    """Base class for all package errors."""


class TruncationError(HybridTeleportError, ValueError):
    """Fock cutoff too small for the requested coherent amplitude."""


class DimensionMismatch(HybridTeleportError, ValueError):
    pass


class UnknownLabel(HybridTeleportError, KeyError):
    pass


class ModelMismatch(HybridTeleportError, ValueError):
    """State does not carry the modes a measurement model acts on."""


class MaxRoundsExceeded(HybridTeleportError, RuntimeError):
    def __init__(self, rounds):
        super().__init__(f"no success heralded after {rounds} rounds")
        self.rounds = rounds


class ConvergenceError(HybridTeleportError, RuntimeError):
    pass


class AmbiguousBranch(HybridTeleportError, RuntimeError):
    """Dressed state cannot be matched to a bare photon-number branch."""


class ConfigError(HybridTeleportError, ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
