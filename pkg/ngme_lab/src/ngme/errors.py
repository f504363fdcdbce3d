"""
Error hierarchy for the NGME toolkit.

Every error carries a human readable ``detail`` and the process ``exit_code``
the command line maps it to.
"""


class NgmeError(Exception):
    """Base class; mirrors an HTTP-style (status, detail) contract."""

    exit_code = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail

    def __str__(self) -> str:
        return self.detail


class ArgumentError(NgmeError):
    """Bad parameter, unnormalized amplitudes, value out of range."""

    exit_code = 2


class LayoutError(ArgumentError):
    """Operand dimensions do not match the party layout."""


class ContractError(ArgumentError):
    """Operator fails a structural contract (Hermitian, dichotomic, involutory)."""


class BracketError(ArgumentError):
    """Root finding was given a bracket without a sign change."""


class CapacityError(NgmeError):
    """Requested dimension or grid exceeds the configured cap."""

    exit_code = 3


class InvariantViolation(NgmeError):
    """Numerical invariant broken beyond tolerance."""

    exit_code = 4
