"""
Grid checks of the model assumptions: symmetry of the error density, shape of
the loss, and the monotone likelihood ratio property used for the B-Z class.
"""

import logging
from typing import Sequence

import numpy as np

from ordest.errors import DomainError
from ordest.models.base import AbstractLocationFamily
from ordest.models.loss import Loss
from ordest.schemas import CheckClause, CheckReport

UNDERFLOW = 1e-300

logger = logging.getLogger(__name__)


def _clause(
    name: str, violations: np.ndarray, points: np.ndarray, tol: float
) -> CheckClause:
    """A clause passes when every violation is at most tol."""
    if violations.size == 0:
        return CheckClause(name=name, passed=True)
    worst = int(np.argmax(violations))
    magnitude = max(float(violations[worst]), 0.0)
    return CheckClause(
        name=name,
        passed=magnitude <= tol,
        max_violation=magnitude,
        witness=np.atleast_1d(points[worst]).astype(float).tolist(),
    )


def validate_d1(
    density: AbstractLocationFamily,
    grid: Sequence[tuple[float, float]],
    tol: float = 1e-12,
    *,
    check_mass: bool = False,
) -> CheckReport:
    """Check f(z1, z2) = f(z2, z1) = f(-z1, -z2) on the grid."""
    points = np.asarray(grid, dtype=float).reshape(-1, 2)
    if len(points) == 0:
        raise DomainError("validate_d1 needs a non-empty grid")

    values = np.array([density.pdf(z1, z2) for z1, z2 in points])
    exchanged = np.array([density.pdf(z2, z1) for z1, z2 in points])
    reflected = np.array([density.pdf(-z1, -z2) for z1, z2 in points])

    clauses = [
        _clause("exchange", np.abs(values - exchanged), points, tol),
        _clause("reflection", np.abs(values - reflected), points, tol),
    ]
    if check_mass:
        mass = density.total_mass()
        clauses.append(
            CheckClause(
                name="normalization",
                passed=abs(mass - 1.0) <= max(tol, 1e-8),
                max_violation=abs(mass - 1.0),
                detail=f"total mass {mass!r}",
            )
        )
    report = CheckReport(name="d1", clauses=clauses)
    logger.debug("D1 validation of %r: passed=%s", density, report.passed)
    return report


def validate_d2(loss: Loss, grid: Sequence[float], tol: float = 1e-12) -> CheckReport:
    """
    Check W(0) = 0, W even, W strictly decreasing on t < 0 and strictly
    increasing on t > 0, and W' nondecreasing. The grid is symmetrized and 0 is
    added, so one half-line of points is enough.
    """
    half = np.abs(np.asarray(grid, dtype=float).ravel())
    if half.size == 0:
        raise DomainError("validate_d2 needs a non-empty grid")
    positive = np.unique(half[half > 0])
    t = np.concatenate((-positive[::-1], [0.0], positive))

    w = np.asarray(loss.w(t), dtype=float)
    w_mirror = np.asarray(loss.w(-t), dtype=float)
    w_prime = np.asarray(loss.w_prime(t), dtype=float)
    zero = np.array([abs(float(loss.w(np.array(0.0))))])

    left = w[: positive.size + 1]
    right = w[positive.size :]
    clauses = [
        _clause("zero", zero, np.array([0.0]), tol),
        _clause("evenness", np.abs(w - w_mirror), t, tol),
        # strict: each step must go the right way, a flat step is a violation
        _strict_clause("decreasing_negative", np.diff(left), t[1 : positive.size + 1]),
        _strict_clause("increasing_positive", -np.diff(right), t[positive.size + 1 :]),
        _clause("derivative_monotone", -np.diff(w_prime), t[1:], tol),
    ]
    return CheckReport(name=f"d2:{loss.name}", clauses=clauses)


def _strict_clause(name: str, steps: np.ndarray, points: np.ndarray) -> CheckClause:
    """Passes when every step is strictly negative."""
    if steps.size == 0:
        return CheckClause(name=name, passed=True)
    worst = int(np.argmax(steps))
    return CheckClause(
        name=name,
        passed=bool(np.all(steps < 0)),
        max_violation=max(float(steps[worst]), 0.0),
        witness=[float(points[worst])],
    )


def check_mlr(
    source: AbstractLocationFamily,
    t: float,
    delta: float,
    s_grid: Sequence[float],
    tol: float = 1e-12,
) -> CheckReport:
    """
    Check that s -> H(t - delta, s) / H(t, s) is monotone on the grid, where
    H(t, s) is the integral of f(s, s + y) over y <= t. Points whose denominator
    underflows are skipped and listed in the report.
    """
    if delta < 0:
        raise DomainError(f"delta must be non-negative, got {delta}")
    s_values = np.asarray(s_grid, dtype=float).ravel()
    numerator = source.partial_cdf_h(t - delta)
    denominator = source.partial_cdf_h(t)

    kept, ratios, skipped = [], [], []
    for s in s_values:
        below = float(denominator(s))
        if below < UNDERFLOW:
            skipped.append(float(s))
            continue
        kept.append(float(s))
        ratios.append(float(numerator(s)) / below)

    steps = np.diff(np.asarray(ratios))
    increasing = bool(np.all(steps >= -tol))
    decreasing = bool(np.all(steps <= tol))
    if increasing and decreasing:
        direction = "constant"
    elif increasing:
        direction = "increasing"
    elif decreasing:
        direction = "decreasing"
    else:
        direction = "none"

    clause = CheckClause(name="monotone_ratio", passed=direction != "none")
    if direction == "none":
        # the smaller of the two one-sided violations
        up, down = float(np.max(steps)), float(-np.min(steps))
        worst = int(np.argmin(steps)) if up >= down else int(np.argmax(steps))
        clause = CheckClause(
            name="monotone_ratio",
            passed=False,
            max_violation=min(up, down),
            witness=[kept[worst + 1]],
        )
    if skipped:
        logger.debug("MLR check skipped %d grid points with underflow", len(skipped))
    return CheckReport(
        name=f"mlr:t={t:g},delta={delta:g}",
        clauses=[clause],
        direction=direction,
        skipped=skipped,
    )
