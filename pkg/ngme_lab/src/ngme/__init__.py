"""Numerics for genuine multipartite entanglement in the network model."""
from .errors import (
    ArgumentError,
    BracketError,
    CapacityError,
    ContractError,
    InvariantViolation,
    LayoutError,
    NgmeError,
)

__version__ = "1.0.0"

__all__ = [
    "ArgumentError",
    "BracketError",
    "CapacityError",
    "ContractError",
    "InvariantViolation",
    "LayoutError",
    "NgmeError",
    "__version__",
]
