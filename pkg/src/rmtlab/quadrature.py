"""Composite Gauss-Legendre quadrature on [0, pi]^d, d <= 3.

The integrands met in this package have two hard profiles: oscillation
at frequency ~N (``sin(2N theta)/sin(theta)``) and a near pole of width
``1 - s`` at ``theta = 0`` (``((1-s)^2 + 4 s sin^2(theta/2))^-l``).  The
first is handled by uniform panel counts that grow with N, the second by
geometric grading of the panels toward the pole.  Convergence is judged
by comparing a panel layout against its uniform refinement (every panel
split in half).

Panel sums are combined with ``math.fsum`` so the result does not depend
on evaluation order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import AccuracyError, BudgetError, InvalidArgumentError

MAX_PANELS = 2**14
MAX_EVALUATIONS = 10**9
DEFAULT_RTOL = 1e-11
DEFAULT_ATOL = 1e-14


@lru_cache(maxsize=None)
def _legendre(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def oscillation_panels(N: int) -> int:
    """Default uniform panel count for an integrand oscillating at frequency ~N."""
    return max(64, 8 * int(N))


@dataclass(frozen=True)
class QuadratureRule:
    """Composite rule on ``[lo, hi]``.

    ``panels`` uniform panels are laid over the interval; if ``pole_width``
    is given, geometric breakpoints ``lo + pole_width * 2**k`` are merged
    in, grading the mesh toward ``lo``.
    """

    order: int = 16
    panels: int = 64
    pole_width: float | None = None
    grading_ratio: float = 2.0

    def __post_init__(self):
        if self.order not in (8, 16, 32):
            raise InvalidArgumentError("order must be one of 8, 16, 32")
        if self.panels < 1:
            raise InvalidArgumentError("panels must be >= 1")
        if self.pole_width is not None and not self.pole_width > 0:
            raise InvalidArgumentError("pole_width must be positive")

    def breakpoints(self, lo: float, hi: float) -> np.ndarray:
        pts = np.linspace(lo, hi, self.panels + 1)
        if self.pole_width is not None:
            first = pts[1] - lo
            w = float(self.pole_width) / 8.0
            graded = []
            while w < first:
                graded.append(lo + w)
                w *= self.grading_ratio
            pts = np.union1d(pts, np.asarray(graded, dtype=float))
        return pts


def _refine(breaks: np.ndarray) -> np.ndarray:
    mid = 0.5 * (breaks[:-1] + breaks[1:])
    out = np.empty(2 * breaks.size - 1)
    out[0::2] = breaks
    out[1::2] = mid
    return out


def nodes_weights(breaks: np.ndarray, order: int):
    """Nodes and weights of the composite rule over the given breakpoints."""
    x, w = _legendre(order)
    half = 0.5 * np.diff(breaks)
    centre = 0.5 * (breaks[:-1] + breaks[1:])
    nodes = centre[:, None] + half[:, None] * x[None, :]
    weights = half[:, None] * w[None, :]
    return nodes, weights


def _apply_1d(f, breaks, order) -> float:
    nodes, weights = nodes_weights(breaks, order)
    vals = np.asarray(f(nodes.ravel()), dtype=float).reshape(nodes.shape)
    if not np.all(np.isfinite(vals)):
        raise AccuracyError("integrand is not finite on the quadrature nodes")
    return math.fsum((vals * weights).sum(axis=1))


def _converged(coarse: float, fine: float, rtol: float, atol: float) -> bool:
    return abs(fine - coarse) <= max(rtol * abs(fine), atol)


@dataclass
class QuadResult:
    value: float
    error: float
    panels: int
    evaluations: int = 0
    history: list = field(default_factory=list)


def integrate_1d(f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
                 rule: QuadratureRule | None = None, *, rtol: float = DEFAULT_RTOL,
                 atol: float = DEFAULT_ATOL, max_panels: int = MAX_PANELS,
                 full_output: bool = False):
    """Integrate a vectorised ``f`` over ``[lo, hi]``.

    The rule is refined by panel doubling until two successive layouts
    agree to ``max(rtol * |I|, atol)``.

    Raises
    ------
    AccuracyError
        If the panel count would exceed ``max_panels`` before convergence.
    """
    if not lo < hi:
        raise InvalidArgumentError("integrate_1d requires lo < hi")
    rule = rule or QuadratureRule()
    breaks = rule.breakpoints(lo, hi)
    coarse = _apply_1d(f, breaks, rule.order)
    evals = (breaks.size - 1) * rule.order
    history = [coarse]
    while True:
        breaks = _refine(breaks)
        if breaks.size - 1 > max_panels:
            raise AccuracyError(
                f"no convergence within {max_panels} panels "
                f"(last estimates {history[-2:] if len(history) > 1 else history})")
        fine = _apply_1d(f, breaks, rule.order)
        evals += (breaks.size - 1) * rule.order
        history.append(fine)
        if _converged(coarse, fine, rtol, atol):
            if full_output:
                return QuadResult(fine, abs(fine - coarse), breaks.size - 1, evals, history)
            return fine
        coarse = fine


def _apply_nd(f, grids, chunk) -> float:
    """Tensor-product sum over the per-axis (nodes, weights) grids.

    The first axis is processed in slices to bound memory.
    """
    (x0, w0), rest = grids[0], grids[1:]
    mesh_rest = np.meshgrid(*[g[0] for g in rest], indexing="ij")
    w_rest = w_rest_product(rest)
    partial = []
    for start in range(0, x0.size, chunk):
        xs = x0[start:start + chunk]
        args = [xs.reshape((-1,) + (1,) * len(rest))] + [m[None, ...] for m in mesh_rest]
        vals = np.asarray(f(*args), dtype=float)
        vals = np.broadcast_to(vals, (xs.size,) + w_rest.shape)
        if not np.all(np.isfinite(vals)):
            raise AccuracyError("integrand is not finite on the quadrature nodes")
        inner = (vals * w_rest[None, ...]).reshape(xs.size, -1).sum(axis=1)
        partial.append(inner * w0[start:start + chunk])
    return math.fsum(np.concatenate(partial))


def w_rest_product(grids) -> np.ndarray:
    out = np.ones(())
    for _, w in grids:
        out = np.multiply.outer(out, w)
    return out


def integrate_nd(f: Callable[..., np.ndarray], d: int, rules: Sequence[QuadratureRule] | QuadratureRule | None = None,
                 lo: float = 0.0, hi: float = math.pi, *, rtol: float = DEFAULT_RTOL,
                 atol: float = DEFAULT_ATOL, max_evaluations: int = MAX_EVALUATIONS,
                 max_panels: int = MAX_PANELS, full_output: bool = False):
    """Tensor-product composite Gauss-Legendre over ``[lo, hi]^d``.

    ``f(t1, ..., td)`` receives broadcastable arrays.  All axes are refined
    together; the same convergence test as :func:`integrate_1d` applies.

    Raises
    ------
    BudgetError
        If the next refinement would push the cumulative number of
        integrand evaluations past ``max_evaluations``.
    """
    if d not in (2, 3):
        raise InvalidArgumentError("integrate_nd supports d = 2 or 3")
    if rules is None or isinstance(rules, QuadratureRule):
        rules = [rules or QuadratureRule()] * d
    if len(rules) != d:
        raise InvalidArgumentError("one rule per axis is required")
    breaks = [r.breakpoints(lo, hi) for r in rules]

    def grids():
        return [tuple(a.ravel() for a in nodes_weights(b, r.order)) for b, r in zip(breaks, rules)]

    def count():
        return int(np.prod([(b.size - 1) * r.order for b, r in zip(breaks, rules)]))

    evals = count()
    if evals > max_evaluations:
        raise BudgetError(f"{evals} evaluations exceed the budget of {max_evaluations}")
    g = grids()
    chunk = max(1, int(4_000_000 // max(1, np.prod([x.size for x, _ in g[1:]]))))
    coarse = _apply_nd(f, g, chunk)
    history = [coarse]
    while True:
        breaks = [_refine(b) for b in breaks]
        if max(b.size - 1 for b in breaks) > max_panels:
            raise AccuracyError(f"no convergence within {max_panels} panels per axis")
        evals += count()
        if evals > max_evaluations:
            raise BudgetError(f"{evals} evaluations exceed the budget of {max_evaluations}")
        g = grids()
        chunk = max(1, int(4_000_000 // max(1, np.prod([x.size for x, _ in g[1:]]))))
        fine = _apply_nd(f, g, chunk)
        history.append(fine)
        if _converged(coarse, fine, rtol, atol):
            if full_output:
                return QuadResult(fine, abs(fine - coarse), max(b.size - 1 for b in breaks), evals, history)
            return fine
        coarse = fine
