"""Truncated-Fock simulator for qubit-to-cat teleportation through entangled
coherent states, its verification gadgets, and cavity self-Kerr tuning."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AmbiguousBranch,
    ConfigError,
    ConvergenceError,
    DimensionMismatch,
    HybridTeleportError,
    MaxRoundsExceeded,
    ModelMismatch,
    TruncationError,
    UnknownLabel,
)

__all__ = [
    "__version__",
    "AmbiguousBranch",
    "ConfigError",
    "ConvergenceError",
    "DimensionMismatch",
    "HybridTeleportError",
    "MaxRoundsExceeded",
    "ModelMismatch",
    "TruncationError",
    "UnknownLabel",
]
