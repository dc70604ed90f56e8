"""Exception hierarchy.

``ArgumentError`` covers malformed inputs (bad indices, mismatched spaces,
invalid configs).  Everything under ``ContractError`` signals that a numerical
precondition or postcondition did not hold.
"""


class ZenoError(Exception):
    pass


class ArgumentError(ZenoError, ValueError):
    pass


class ContractError(ZenoError, ArithmeticError):
    pass


class NonHermitianError(ContractError):
    pass


class DimensionGuardError(ContractError):
    pass


class IntegrationError(ContractError):
    def __init__(self, message, step=None):
        super().__init__(message if step is None else f"{message} (step {step})")
        self.step = step


class DegenerateNESSError(ContractError):
    pass


class DegenerateDarkStateError(ContractError):
    pass


class NotDiagonalizableError(ContractError):
    pass


class DecompositionError(ContractError):
    pass


class ConstructionError(ContractError):
    pass


class LocalityError(ContractError):
    pass


class DegenerateSpectrumError(ContractError):
    def __init__(self, message, pairs=()):
        super().__init__(message)
        self.pairs = list(pairs)


class NonUniqueStationaryError(ContractError):
    pass
