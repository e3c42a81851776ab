"""Exception hierarchy shared by every module of the laboratory."""


class RmtLabError(Exception):
    """Base class for all errors raised by rmtlab."""


class InvalidArgumentError(RmtLabError, ValueError):
    """An argument is outside the documented domain (e.g. ``N = 0``)."""


class NumericalDegeneracyError(RmtLabError, ArithmeticError):
    """A spectral computation hit a (probability zero) degenerate configuration."""


class PoleError(RmtLabError, ValueError):
    """Evaluation requested at or beyond the pole ``s = 1``."""


class AccuracyError(RmtLabError, ArithmeticError):
    """Quadrature did not reach its tolerance before the refinement cap."""


class BudgetError(RmtLabError, RuntimeError):
    """A computation would exceed its evaluation budget."""


class DomainError(RmtLabError, ArithmeticError):
    """A sample left the domain of the requested function (e.g. ``1 + x <= 0``)."""


class PreconditionError(RmtLabError, ValueError):
    """An evaluation point violates a precondition (e.g. feasibility)."""


class UnsupportedOrderError(RmtLabError, ValueError):
    """Requested correlation or moment order is not supported."""
