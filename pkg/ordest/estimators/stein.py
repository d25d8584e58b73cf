import logging
import math
from functools import partial
from typing import Sequence

import numpy as np

from ordest.errors import DomainError
from ordest.estimators.base import (
    DEFAULT_RELAX_GRID,
    PsiEstimator,
    RelaxResult,
    ShiftFunction,
    worst_clause,
)
from ordest.schemas import CheckReport

logger = logging.getLogger(__name__)


def _no_shift(t: np.ndarray) -> np.ndarray:
    return np.zeros_like(np.asarray(t, dtype=float))


def _truncated(psi: ShiftFunction, t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return np.maximum(-0.5 * t, psi(t))


def _isotonic_shift(alpha: float, t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return np.where(t >= 0, 0.0, -(1.0 - alpha) * t)


def blee() -> PsiEstimator:
    """The unrestricted best location equivariant estimator (X1, X2)."""
    return PsiEstimator(psi=_no_shift, name="blee")


def stein_improve(base: PsiEstimator) -> PsiEstimator:
    """
    Stein-type truncation psi*(t) = max(-t/2, psi(t)). The coordinates are pooled
    whenever the base estimate breaks the order, so the result is always ordered.
    """
    return PsiEstimator(
        psi=partial(_truncated, base.psi),
        name=f"stein({base.name})",
        metadata={"base": base.name},
    )


def restricted_mle() -> PsiEstimator:
    return stein_improve(blee()).model_copy(update={"name": "mle"})


def isotonic(alpha: float) -> PsiEstimator:
    if not math.isfinite(alpha):
        raise DomainError(f"alpha must be finite, got {alpha}")
    return PsiEstimator(
        psi=partial(_isotonic_shift, alpha),
        name=f"isotonic:{alpha:g}",
        metadata={"alpha": alpha},
    )


def stein_relax(
    base: PsiEstimator,
    candidate_psi: ShiftFunction,
    grid: Sequence[float] | None = None,
    tol: float = 1e-12,
) -> RelaxResult:
    """
    Check that the candidate is a partial truncation of base: where base breaks
    the order (psi(t) < -t/2) the candidate lies between psi(t) and -t/2,
    everywhere else it equals psi(t). A candidate that passes dominates base.
    """
    t = np.asarray(DEFAULT_RELAX_GRID if grid is None else grid, dtype=float).ravel()
    if t.size == 0:
        raise DomainError("stein_relax needs a non-empty grid")
    reference = np.asarray(base.shift(t), dtype=float)
    candidate = np.broadcast_to(np.asarray(candidate_psi(t), dtype=float), t.shape)
    pooled = -0.5 * t
    breaks = reference < pooled

    below = np.where(breaks, reference - candidate, 0.0)
    above = np.where(breaks, candidate - pooled, 0.0)
    changed = np.where(breaks, 0.0, np.abs(candidate - reference))
    clauses = [
        worst_clause("not_below_base", below, t, tol),
        worst_clause("not_above_pooling", above, t, tol),
        worst_clause("unchanged_elsewhere", changed, t, tol),
    ]
    report = CheckReport(name=f"stein_relax:{base.name}", clauses=clauses)
    if not report.passed:
        logger.info("Candidate rejected as a relaxation of %s", base.name)
        return RelaxResult(None, report)
    estimator = PsiEstimator(
        psi=candidate_psi, name=f"relaxed({base.name})", metadata={"base": base.name}
    )
    return RelaxResult(estimator, report)
