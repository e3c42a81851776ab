"""Moments of the logarithmic derivative of SO(2N+1) characteristic polynomials.

Haar and MCMC samplers for the eigenangles, the sine-kernel correlation
functions, composite Gauss-Legendre quadrature, Monte Carlo and exact
moment estimators, closed-form asymptotics, and a reproducible harness.
"""
__version__ = "0.1.0"

from .errors import (AccuracyError, BudgetError, DomainError, InvalidArgumentError, NumericalDegeneracyError,
                     PoleError, PreconditionError, RmtLabError, UnsupportedOrderError)
from .logderiv import EvaluationPoint
from .rng import RngStream

__all__ = ["__version__", "EvaluationPoint", "RngStream", "RmtLabError", "InvalidArgumentError",
           "NumericalDegeneracyError", "PoleError", "AccuracyError", "BudgetError", "DomainError",
           "PreconditionError", "UnsupportedOrderError"]
