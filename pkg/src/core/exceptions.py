"""
Exception hierarchy for the MCNN consolidation solver.

Scripts map ConfigError to exit code 2 and NumericalError to exit code 3.
"""


class MCNNError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(MCNNError, ValueError):
    """Invalid configuration value, unknown key, or missing input file."""


class NumericalError(MCNNError, ArithmeticError):
    """A computation left its valid numerical regime."""


class DomainError(NumericalError):
    """A constitutive function was evaluated outside its domain.

    Attributes:
        index (int or None): Offending sample or node index, when known.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class UnstableSchemeError(NumericalError):
    """The explicit time step exceeds the stability bound.

    Attributes:
        bound (float): Largest stable time step.
    """

    def __init__(self, message, bound):
        super().__init__(message)
        self.bound = bound


class NonFiniteLossError(NumericalError):
    """A loss evaluation produced NaN or infinity.

    Attributes:
        index (int or None): Offending sample index within the batch.
        epoch (int or None): Training epoch at which the loss blew up.
    """

    def __init__(self, message, index=None, epoch=None):
        super().__init__(message)
        self.index = index
        self.epoch = epoch
