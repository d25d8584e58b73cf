"""
Numeric checks of the properties the dominance results rest on, run by the
`verify` command. Every check returns a CheckReport; nothing here raises on a
failed property.
"""

import logging
from typing import Sequence

import numpy as np

from ordest.estimators.base import PsiEstimator, worst_clause
from ordest.estimators.ierd import bz_absolute, bz_squared, ierd_general
from ordest.estimators.stein import blee, isotonic, restricted_mle
from ordest.models.loss import Loss
from ordest.models.normal import NormalLocationModel
from ordest.models.validators import check_mlr, validate_d1, validate_d2
from ordest.risk import exact_risk, r_lambda
from ordest.schemas import CheckClause, CheckReport

# agreement between closed forms and the generic root curve
IERD_AGREEMENT = 1e-6
# tolerance for shape checks on psi values obtained by root finding
SHAPE_TOL = 1e-8

logger = logging.getLogger(__name__)


def _lemma_minimizer(model: NormalLocationModel, loss: Loss, quick: bool) -> CheckReport:
    """r_lambda(c, t) is minimized at c = (lambda - t) / 2 on a c-grid."""
    scale = model.sigma
    size = 3 if quick else 5
    points = 100 if quick else 200
    c_grid = scale * np.linspace(-1.99, 1.99, points)
    step = c_grid[1] - c_grid[0]

    clauses = []
    for t in scale * np.linspace(-1.0, 1.0, size):
        for lam in scale * np.linspace(0.0, 1.0, size):
            risks = [r_lambda(model, loss, c, t, lam) for c in c_grid]
            best = c_grid[int(np.argmin(risks))]
            miss = abs(best - 0.5 * (lam - t))
            clauses.append(
                CheckClause(
                    name=f"t={t:.4g},lambda={lam:.4g}",
                    passed=miss <= step * (1 + 1e-9),
                    max_violation=max(miss - step, 0.0),
                    witness=[float(t), float(lam)] if miss > step else None,
                )
            )
    return CheckReport(name=f"lemma_minimizer:{loss.name}", clauses=clauses)


def _mlr(model: NormalLocationModel, quick: bool) -> list[CheckReport]:
    tau = model.tau
    s_grid = model.sigma * np.linspace(-5.0, 5.0, 41 if quick else 201)
    cases = [(0.0, tau)] if quick else [(-tau, 0.5 * tau), (0.0, tau), (tau, 2.0 * tau)]
    return [check_mlr(model, t, delta, s_grid) for t, delta in cases]


def _psi_shape(model: NormalLocationModel, e: PsiEstimator, label: str) -> CheckReport:
    """psi positive and strictly decreasing on [-3 tau, 3 tau], vanishing far right."""
    t = model.tau * np.linspace(-3.0, 3.0, 25)
    psi = np.asarray(e.shift(t), dtype=float)
    far = abs(float(e.shift(1e3 * model.tau)))
    clauses = [
        worst_clause("positive", SHAPE_TOL - psi, t, 0.0),
        worst_clause("decreasing", np.diff(psi) + SHAPE_TOL, t[1:], 0.0),
        CheckClause(name="limit", passed=far <= SHAPE_TOL, max_violation=far),
    ]
    return CheckReport(name=f"psi_shape:{label}", clauses=clauses)


def _ierd_agreement(model: NormalLocationModel, loss: Loss, quick: bool) -> CheckReport:
    half_width = 8.0 * model.tau
    nodes = np.linspace(-half_width, half_width, 17 if quick else 321)
    generic = np.asarray(ierd_general(model, loss, nodes).shift(nodes), dtype=float)

    if loss.kind == "squared":
        closed = np.asarray(bz_squared(model).shift(nodes), dtype=float)
    elif loss.kind == "absolute":
        closed = np.asarray(bz_absolute(model, exact=True).shift(nodes), dtype=float)
    else:
        # no closed form: the curve must still be decreasing and vanish on the right
        central = np.abs(nodes) <= 3.0 * model.tau
        inner, values = nodes[central], generic[central]
        clauses = [
            worst_clause("positive", SHAPE_TOL - values, inner, 0.0),
            worst_clause("decreasing", np.diff(values) + SHAPE_TOL, inner[1:], 0.0),
            CheckClause(
                name="right_edge",
                passed=abs(generic[-1]) <= 1e-6,
                max_violation=abs(float(generic[-1])),
            ),
        ]
        return CheckReport(name=f"ierd_shape:{loss.name}", clauses=clauses)

    clauses = [worst_clause("agreement", np.abs(generic - closed), nodes, IERD_AGREEMENT)]
    return CheckReport(name=f"ierd_agreement:{loss.name}", clauses=clauses)


def _risk_ordering(model: NormalLocationModel, loss: Loss, quick: bool) -> CheckReport:
    """delta_0.5 <= delta_0.75 <= delta_1 in exact risk, and the MLE below BLEE at 0."""
    tol = 1e-6
    lambdas = [0.0] if quick else [0.0, 0.5 * model.sigma, model.sigma]
    family = [isotonic(alpha) for alpha in (0.5, 0.75, 1.0)]

    clauses = []
    for lam in lambdas:
        risks = [exact_risk(model, lam, e, loss) for e in family]
        gaps = np.diff(risks)
        clauses.append(
            CheckClause(
                name=f"isotonic_order,lambda={lam:.4g}",
                passed=bool(np.all(gaps >= -tol)),
                max_violation=max(float(-np.min(gaps)), 0.0),
                detail=", ".join(f"{e.name}={risk:.8g}" for e, risk in zip(family, risks)),
            )
        )

    mle, unrestricted = (exact_risk(model, 0.0, e, loss) for e in (restricted_mle(), blee()))
    clauses.append(
        CheckClause(
            name="mle_below_blee,lambda=0",
            passed=mle < unrestricted - tol,
            max_violation=max(mle - unrestricted + tol, 0.0),
            detail=f"mle={mle:.8g}, blee={unrestricted:.8g}",
        )
    )
    return CheckReport(name=f"risk_ordering:{loss.name}", clauses=clauses)


def run_battery(
    model: NormalLocationModel, losses: Sequence[Loss], quick: bool = False
) -> list[CheckReport]:
    scale = model.sigma
    axis = scale * np.linspace(-3.0, 3.0, 7 if quick else 13)
    pairs = [(z1, z2) for z1 in axis for z2 in axis]

    reports = [validate_d1(model, pairs, check_mass=not quick)]
    reports.extend(_mlr(model, quick))
    reports.append(_psi_shape(model, bz_squared(model), "bz_squared"))
    reports.append(_psi_shape(model, bz_absolute(model, exact=True), "bz_absolute"))

    for loss in losses:
        shape = validate_d2(loss, scale * np.linspace(0.05, 5.0, 100))
        reports.append(shape)
        if not shape.passed:
            logger.warning("Loss %s fails the loss assumptions, dependent checks skipped", loss.name)
            continue
        reports.append(_lemma_minimizer(model, loss, quick))
        reports.append(_ierd_agreement(model, loss, quick))
        reports.append(_risk_ordering(model, loss, quick))

    failed = [report.name for report in reports if not report.passed]
    logger.info("Verification: %d checks, %d failed", len(reports), len(failed))
    return reports
