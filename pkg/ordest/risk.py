"""
Risks of location equivariant estimators, by quadrature of the one-dimensional
representation R = 2 * integral of r_lambda(psi(t), t) dt and by Monte Carlo.
Both depend on theta only through lambda = theta2 - theta1.
"""

import concurrent.futures
import logging
import math
from typing import Sequence

import numpy as np

from ordest.config import QUADRATURE_TOL, RISK_TOL, RISK_TRUNCATION_SCALES
from ordest.errors import DomainError
from ordest.estimators.base import PsiEstimator
from ordest.models.base import AbstractLocationFamily
from ordest.models.loss import Loss
from ordest.models.normal import NormalLocationModel
from ordest.models.parameters import ThetaPoint
from ordest.numerics import Rng, integrate, sample_bivariate_normal
from ordest.schemas import ExactRiskRow, RiskEstimate, RiskRow

logger = logging.getLogger(__name__)


def _check_lambda(lam: float) -> None:
    if not (math.isfinite(lam) and lam >= 0):
        raise DomainError(f"lambda must be finite and non-negative, got {lam}")


def r_lambda(
    source: AbstractLocationFamily,
    loss: Loss,
    c: float,
    t: float,
    lam: float,
    *,
    tol: float = QUADRATURE_TOL,
) -> float:
    """Integral of W(s - c) f(s, s + t - lambda) over s."""
    _check_lambda(lam)
    piece = source.difference_slice(t - lam)
    if piece.lower >= piece.upper:
        return 0.0
    w = loss.w

    def integrand(s: float) -> float:
        return float(w(s - c)) * piece.pdf(s)

    return integrate(
        integrand, piece.lower, piece.upper, tol, rel_tol=tol, breakpoints=(c,)
    ).value


def exact_risk(
    source: AbstractLocationFamily,
    lam: float,
    e: PsiEstimator,
    loss: Loss,
    tol: float = RISK_TOL,
) -> float:
    _check_lambda(lam)
    radius = RISK_TRUNCATION_SCALES * source.difference_scale
    inner_tol = 1e-2 * tol

    def outer(t: float) -> float:
        return r_lambda(source, loss, e.shift(t), t, lam, tol=inner_tol)

    result = integrate(
        outer, lam - radius, lam + radius, tol, rel_tol=tol, breakpoints=(0.0, lam)
    )
    logger.debug(
        "Exact risk of %s at lambda=%s: %s (error %s, %d evaluations)",
        e.name,
        lam,
        2.0 * result.value,
        2.0 * result.error,
        result.evaluations,
    )
    return 2.0 * result.value


def _risk_from_sample(
    sample: np.ndarray, theta: ThetaPoint, e: PsiEstimator, loss: Loss
) -> tuple[float, float]:
    a1, a2 = e.estimate(sample[:, 0], sample[:, 1])
    losses = np.asarray(loss.evaluate(theta.theta1, theta.theta2, a1, a2), dtype=float)
    return float(np.mean(losses)), float(np.std(losses, ddof=1) / math.sqrt(len(losses)))


def _draw(
    model: NormalLocationModel, theta: ThetaPoint, n: int, seed: int, stream: Sequence[int]
) -> np.ndarray:
    if n < 2:
        raise DomainError(f"Monte Carlo risk needs n >= 2, got {n}")
    return sample_bivariate_normal(
        Rng(seed, stream), theta.theta1, theta.theta2, model.sigma, model.rho, n
    )


def mc_risk(
    model: NormalLocationModel,
    theta: ThetaPoint,
    e: PsiEstimator,
    loss: Loss,
    n: int,
    seed: int,
    *,
    stream: Sequence[int] = (),
) -> RiskEstimate:
    sample = _draw(model, theta, n, seed, stream)
    mean, std_error = _risk_from_sample(sample, theta, e, loss)
    return RiskEstimate(
        mean=mean, std_error=std_error, n=n, seed=seed, loss=loss.name, lam=theta.lam
    )


def _check_grids(estimators: Sequence[PsiEstimator], lambda_grid: Sequence[float]) -> None:
    if not estimators:
        raise DomainError("at least one estimator is required")
    if len(lambda_grid) == 0:
        raise DomainError("the lambda grid is empty")
    for lam in lambda_grid:
        _check_lambda(lam)


def _run_indexed(task, count: int, workers: int) -> list:
    """task(index) for every index, in index order whatever the worker count."""
    if workers <= 1:
        return [task(index) for index in range(count)]
    results = {}
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {executor.submit(task, index): index for index in range(count)}
        for future in concurrent.futures.as_completed(futures):
            results[futures[future]] = future.result()
    return [results[index] for index in range(count)]


def dominance_report(
    model: NormalLocationModel,
    estimators: Sequence[PsiEstimator],
    loss: Loss,
    lambda_grid: Sequence[float],
    n: int,
    seed: int,
    *,
    workers: int = 1,
) -> list[RiskRow]:
    """
    Monte Carlo risk of every estimator at theta = (0, lambda) for each lambda.
    All estimators at one lambda share the sample drawn from substream
    (seed, lambda-index).
    """
    _check_grids(estimators, lambda_grid)

    def point(index: int) -> list[RiskRow]:
        theta = ThetaPoint.canonical(float(lambda_grid[index]))
        sample = _draw(model, theta, n, seed, (index,))
        rows = []
        for e in estimators:
            mean, std_error = _risk_from_sample(sample, theta, e, loss)
            rows.append(
                RiskRow(
                    lam=theta.lam,
                    estimator=e.name,
                    loss=loss.name,
                    risk=mean,
                    std_error=std_error,
                    n=n,
                    seed=seed,
                )
            )
        return rows

    logger.info(
        "Simulating %d estimators on %d lambda points, n=%d, seed=%d, workers=%d",
        len(estimators),
        len(lambda_grid),
        n,
        seed,
        workers,
    )
    rows = [row for chunk in _run_indexed(point, len(lambda_grid), workers) for row in chunk]
    return sorted(rows, key=lambda row: (row.lam, row.estimator))


def exact_report(
    source: AbstractLocationFamily,
    estimators: Sequence[PsiEstimator],
    loss: Loss,
    lambda_grid: Sequence[float],
    tol: float = RISK_TOL,
    *,
    workers: int = 1,
) -> list[ExactRiskRow]:
    _check_grids(estimators, lambda_grid)
    cells = [(float(lam), e) for lam in lambda_grid for e in estimators]

    def cell(index: int) -> ExactRiskRow:
        lam, e = cells[index]
        return ExactRiskRow(
            lam=lam, estimator=e.name, loss=loss.name, risk=exact_risk(source, lam, e, loss, tol)
        )

    logger.info("Integrating exact risk for %d cells", len(cells))
    rows = _run_indexed(cell, len(cells), workers)
    return sorted(rows, key=lambda row: (row.lam, row.estimator))
