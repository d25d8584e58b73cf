"""
Brewster-Zidek type estimators from the integral expression of risk difference.

For each t the boundary shift psi(t) is the root in c of

    k1(c | t) = integral of W'(s - c) h_t(s) ds,    h_t(s) = int_{y <= t} f(s, s + y) dy,

so psi(t) is the W-centre of the law of Z1 given D <= t: its mean under
squared loss and its median under absolute loss. For bivariate normal errors
the squared-loss root has a closed form and the absolute-loss root is a
median equation in one variable.
"""

import logging
from functools import partial
from typing import Literal, Sequence

import numpy as np
from numpy.typing import ArrayLike

from ordest.config import (
    PSI_GRID_HALF_WIDTH,
    PSI_GRID_POINTS,
    QUADRATURE_TOL,
    ROOT_BRACKET_HALF_WIDTH,
    ROOT_TOL,
)
from ordest.errors import BracketError, DomainError, IerdConstructionError, NumericalError
from ordest.estimators.base import (
    DEFAULT_RELAX_GRID,
    PsiEstimator,
    RelaxResult,
    ShiftFunction,
    TabulatedShift,
    worst_clause,
)
from ordest.models.base import NEGLIGIBLE, AbstractLocationFamily
from ordest.models.loss import Loss
from ordest.models.normal import NormalLocationModel
from ordest.numerics import find_root, integrate, log_std_normal_cdf, log_std_normal_pdf
from ordest.schemas import CheckClause, CheckReport

logger = logging.getLogger(__name__)


def default_t_grid(source: AbstractLocationFamily) -> np.ndarray:
    half_width = PSI_GRID_HALF_WIDTH * source.difference_scale
    return np.linspace(-half_width, half_width, PSI_GRID_POINTS)


def _mills_shift(tau: float, t: ArrayLike) -> np.ndarray:
    # (tau / 2) phi(t / tau) / Phi(t / tau), in logs for very negative t
    z = np.asarray(t, dtype=float) / tau
    return 0.5 * tau * np.exp(log_std_normal_pdf(z) - log_std_normal_cdf(z))


def bz_squared(model: NormalLocationModel) -> PsiEstimator:
    return PsiEstimator(
        psi=partial(_mills_shift, model.tau),
        name="bz",
        metadata={"loss": "squared", "sigma": model.sigma, "rho": model.rho},
    )


def k1(
    source: AbstractLocationFamily,
    loss: Loss,
    c: float,
    t: float,
    *,
    tol: float = QUADRATURE_TOL,
    normalized: bool = False,
) -> float:
    """
    Integral of W'(s - c) over the law of (Z1, Z2 - Z1) restricted to Z2 - Z1 <= t.
    With normalized=True it is divided by P(D <= t), which keeps the value of
    order one in the far left tail. Strictly decreasing in c for a valid loss.
    """
    marginal = source.truncated_marginal(t)
    w_prime = loss.w_prime

    def integrand(s: float) -> float:
        return float(w_prime(s - c)) * marginal.pdf(s)

    value = integrate(
        integrand, marginal.lower, marginal.upper, tol, rel_tol=tol, breakpoints=(c,)
    ).value
    return value if normalized else value * marginal.mass


def _bracket(source: AbstractLocationFamily, t: float) -> tuple[float, float]:
    radius = ROOT_BRACKET_HALF_WIDTH * source.scale
    return -0.5 * t - radius, -0.5 * t + radius


def _ierd_root(
    source: AbstractLocationFamily, loss: Loss, t: float, tol: float
) -> float:
    lo, hi = _bracket(source, t)
    return find_root(
        lambda c: k1(source, loss, c, t, normalized=True), lo, hi, tol, expand=True
    )


def median_shift(model: AbstractLocationFamily, t: float, tol: float = ROOT_TOL) -> float:
    """The median of Z1 given D <= t: the absolute-loss shift at t."""
    marginal = model.truncated_marginal(t)

    def below_median(c: float) -> float:
        if c <= marginal.lower:
            return -0.5
        upper = min(c, marginal.upper)
        return (
            integrate(
                marginal.pdf, marginal.lower, upper, NEGLIGIBLE, rel_tol=QUADRATURE_TOL
            ).value
            - 0.5
        )

    lo, hi = _bracket(model, t)
    try:
        return find_root(below_median, lo, hi, tol, expand=True)
    except BracketError as err:
        raise BracketError(
            f"median of Z1 given D <= {t!r} not bracketed", err.attempts
        ) from err


def _median_curve(model: AbstractLocationFamily, tol: float, t: ArrayLike) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    roots = [median_shift(model, float(value), tol) for value in t.ravel()]
    return np.asarray(roots, dtype=float).reshape(t.shape)


def bz_absolute(
    model: NormalLocationModel,
    t_grid: Sequence[float] | None = None,
    *,
    exact: bool = False,
    tol: float = ROOT_TOL,
) -> PsiEstimator:
    """
    Absolute-loss shift C(t), the median of Z1 given D <= t. By default C is
    solved on the grid and interpolated monotonically; exact=True solves the
    median equation at every evaluation instead.
    """
    metadata = {"loss": "absolute", "sigma": model.sigma, "rho": model.rho}
    if exact:
        return PsiEstimator(
            psi=partial(_median_curve, model, tol),
            name="bz",
            metadata={**metadata, "exact": True},
        )

    nodes = default_t_grid(model) if t_grid is None else np.asarray(t_grid, dtype=float)
    values = _median_curve(model, tol, nodes)
    logger.debug("Tabulated absolute-loss shift on %d nodes for %r", len(nodes), model)
    return PsiEstimator(
        psi=TabulatedShift(nodes, values),
        name="bz",
        metadata={**metadata, "tabulated": len(nodes)},
    )


def ierd_general(
    source: AbstractLocationFamily,
    loss: Loss,
    t_grid: Sequence[float] | None = None,
    tol: float = ROOT_TOL,
) -> PsiEstimator:
    """
    Tabulate the root of k1(c | t) on the grid for any density and loss. Each t
    is solved on its own, so the table does not depend on the solve order.
    """
    nodes = default_t_grid(source) if t_grid is None else np.asarray(t_grid, dtype=float)
    values = np.empty(len(nodes))
    for index, t in enumerate(nodes):
        try:
            values[index] = _ierd_root(source, loss, float(t), tol)
        except NumericalError as err:
            logger.error("IERD construction failed at t=%s for %s loss", t, loss.name)
            raise IerdConstructionError(float(t), err) from err

    right_tail: ShiftFunction | None = None
    if isinstance(source, NormalLocationModel) and loss.kind == "squared":
        right_tail = partial(_mills_shift, source.tau)
    return PsiEstimator(
        psi=TabulatedShift(nodes, values, right_tail=right_tail),
        name="ierd",
        metadata={"loss": loss.name, "tabulated": len(nodes)},
    )


def relax_psi(
    candidate_psi: ShiftFunction,
    reference: PsiEstimator,
    direction: Literal["increasing", "decreasing"],
    *,
    grid: Sequence[float] | None = None,
    tol: float = 1e-9,
    limit_point: float = 1e3,
    limit_tol: float = 1e-8,
) -> RelaxResult:
    """
    Accept a candidate shift lying between the boundary estimator and BLEE:
    for a decreasing candidate psi <= reference, for an increasing one
    psi >= reference, in both cases monotone in that direction and vanishing
    as t grows.
    """
    if direction not in ("increasing", "decreasing"):
        raise DomainError(f"direction must be increasing or decreasing, got {direction!r}")
    t = np.asarray(DEFAULT_RELAX_GRID if grid is None else grid, dtype=float).ravel()
    if t.size < 2:
        raise DomainError("relax_psi needs at least two grid points")
    candidate = np.broadcast_to(np.asarray(candidate_psi(t), dtype=float), t.shape)
    bound = np.asarray(reference.shift(t), dtype=float)

    sign = 1.0 if direction == "decreasing" else -1.0
    ordering = sign * (candidate - bound)
    steps = sign * np.diff(candidate)
    far = np.array([limit_point])
    limit = abs(float(np.broadcast_to(np.asarray(candidate_psi(far), dtype=float), (1,))[0]))

    clauses = [
        worst_clause("ordering", ordering, t, tol),
        worst_clause(f"monotone_{direction}", steps, t[1:], tol),
        CheckClause(
            name="limit",
            passed=limit <= limit_tol,
            max_violation=limit,
            witness=[limit_point] if limit > limit_tol else None,
        ),
    ]
    report = CheckReport(name=f"relax:{reference.name}", clauses=clauses, direction=direction)
    if not report.passed:
        logger.info(
            "Candidate rejected against %s: %s",
            reference.name,
            ", ".join(clause.name for clause in report.failed_clauses()),
        )
        return RelaxResult(None, report)
    estimator = PsiEstimator(
        psi=candidate_psi,
        name=f"relaxed({reference.name})",
        metadata={"reference": reference.name, "direction": direction},
    )
    return RelaxResult(estimator, report)
