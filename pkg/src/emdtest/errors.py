"""Exception hierarchy shared by every module in the package."""


class EmdTestError(Exception):
    """Base class for all package errors."""


class DomainError(EmdTestError, ValueError):
    """A coordinate lies outside ``[0, delta]^d`` or a parameter is out of range."""


class NormalizationError(EmdTestError, ValueError):
    """Weights do not sum to one within tolerance."""


class DomainMismatch(EmdTestError, ValueError):
    """Two objects live on different ambient spaces."""


class EmptyInput(EmdTestError, ValueError):
    pass


class BudgetExceeded(EmdTestError, RuntimeError):
    """A sample source ran past its configured hard budget."""


class SolverFailure(EmdTestError, RuntimeError):
    pass


class ConfigError(EmdTestError, ValueError):
    pass


class SupportError(EmdTestError, ValueError):
    """A distribution puts mass outside the nodes of a tree."""


class ParamError(EmdTestError, ValueError):
    pass


class ParseError(EmdTestError, ValueError):
    """An input file does not match its documented JSON schema."""
