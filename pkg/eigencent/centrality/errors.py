# Copyright 2026 The eigencent Authors | http://www.eclipse.org/legal/epl-v20.html
"""Exception types raised by the eigencent library."""


class EigencentError(Exception):
    pass


class ContractError(EigencentError, ValueError):
    """An argument has the wrong shape, length or range."""


class EmptySequenceError(ContractError):
    pass


class PreconditionError(ContractError):
    pass


class ConfigError(EigencentError, ValueError):
    pass


class CheckpointError(EigencentError):
    pass


class DivergenceError(EigencentError, ArithmeticError):
    """Training produced a non-finite loss."""
