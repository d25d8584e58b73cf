import logging
import math
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd
import typer

from ordest.config import (
    DEFAULT_RHO,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_SIGMA2,
    DEFAULT_WORKERS,
    DENTAL_REFERENCE,
    REFERENCE_TOLERANCE,
    RISK_TOL,
)
from ordest.dataset import load_csv, plugin_model, summarize
from ordest.errors import EXIT_VERIFICATION, DomainError
from ordest.estimators.base import PsiEstimator
from ordest.estimators.ierd import bz_absolute, bz_squared, ierd_general
from ordest.estimators.stein import blee, isotonic, restricted_mle
from ordest.models.loss import Loss, get_loss
from ordest.models.normal import NormalLocationModel
from ordest.models.validators import validate_d2
from ordest.risk import dominance_report, exact_report
from ordest.schemas import (
    AnalysisReport,
    CheckReport,
    EstimateLine,
    EstimateReport,
    ExactRiskRow,
    RiskRow,
    RiskTable,
    RunConfig,
    VerificationReport,
)
from ordest.verification import run_battery

DEFAULT_ESTIMATORS = "blee,mle,bz"
DEFAULT_VERIFY_LOSSES = ["squared", "absolute"]
# column means closer than this to the published ones select the dental reference
REFERENCE_MATCH = 5e-4

logger = logging.getLogger(__name__)


def _sigma_option():
    return typer.Option(None, "--sigma", help="Common standard deviation of X1 and X2.")


def _sigma2_option():
    return typer.Option(
        None, "--sigma2", help=f"Common variance (default {DEFAULT_SIGMA2})."
    )


def _rho_option():
    return typer.Option(DEFAULT_RHO, "--rho", help="Correlation of X1 and X2.")


def _output_option():
    return typer.Option(None, "--output", help="Write here instead of stdout.")


def _format_option():
    return typer.Option("csv", "--format", help="csv or json.")


def resolve_model(
    sigma: Optional[float], sigma2: Optional[float], rho: float
) -> NormalLocationModel:
    if sigma is not None and sigma2 is not None:
        raise typer.BadParameter("give either --sigma or --sigma2, not both")
    if sigma is not None:
        if not (math.isfinite(sigma) and sigma > 0):
            raise DomainError(f"sigma must be positive, got {sigma}")
        return plugin_model(sigma * sigma, rho)
    return plugin_model(DEFAULT_SIGMA2 if sigma2 is None else sigma2, rho)


def boundary_estimator(
    model: NormalLocationModel, loss: Loss, *, exact: bool = False
) -> PsiEstimator:
    """The Brewster-Zidek type estimator for the loss."""
    if loss.kind == "squared":
        return bz_squared(model)
    if loss.kind == "absolute":
        return bz_absolute(model, exact=exact)
    return ierd_general(model, loss).model_copy(update={"name": "bz"})


def estimator_names(text: str) -> list[str]:
    return [name.strip() for name in text.split(",") if name.strip()]


def parse_estimators(
    text: str, model: NormalLocationModel, loss: Loss
) -> list[PsiEstimator]:
    """Comma separated names from blee, mle, bz, isotonic:<alpha>."""
    names = estimator_names(text)
    if not names:
        raise typer.BadParameter("the estimator list is empty")

    estimators = []
    for name in names:
        if name == "blee":
            estimators.append(blee())
        elif name == "mle":
            estimators.append(restricted_mle())
        elif name == "bz":
            estimators.append(boundary_estimator(model, loss))
        elif name.startswith("isotonic:"):
            try:
                alpha = float(name.partition(":")[2])
            except ValueError:
                raise typer.BadParameter(f"bad isotonic weight in {name!r}") from None
            estimators.append(isotonic(alpha))
        else:
            raise typer.BadParameter(
                f"unknown estimator {name!r}, expected blee, mle, bz or isotonic:<alpha>"
            )
    return estimators


def lambda_grid(
    model: NormalLocationModel,
    lambda_min: Optional[float],
    lambda_max: Optional[float],
    lambda_step: Optional[float],
) -> tuple[np.ndarray, float, float, float]:
    """The grid and its resolved bounds; by default 0 to 3 tau in steps of tau / 8."""
    low = 0.0 if lambda_min is None else lambda_min
    high = 3.0 * model.tau if lambda_max is None else lambda_max
    step = model.tau / 8.0 if lambda_step is None else lambda_step
    if not (math.isfinite(low) and math.isfinite(high) and low >= 0):
        raise DomainError("lambda bounds must be finite and non-negative")
    if not (math.isfinite(step) and step > 0):
        raise DomainError(f"lambda step must be positive, got {step}")
    if high < low:
        raise DomainError(f"--lambda-max {high} is below --lambda-min {low}")
    count = int(math.floor((high - low) / step + 1e-9)) + 1
    return low + step * np.arange(count), low, high, step


def risk_loss(name: str) -> Loss:
    loss = get_loss(name)
    if not validate_d2(loss, np.linspace(0.05, 5.0, 100)).passed:
        raise DomainError(f"loss {name!r} violates the loss assumptions")
    return loss


def format_pair(first: float, second: float) -> str:
    return f"({first:.6g}, {second:.6g})"


def standard_estimates(
    model: NormalLocationModel, x1: float, x2: float
) -> list[EstimateLine]:
    estimators = [
        ("blee", blee()),
        ("mle", restricted_mle()),
        ("bz_squared", bz_squared(model)),
        ("bz_absolute", bz_absolute(model, exact=True)),
    ]
    lines = []
    for label, e in estimators:
        first, second = e.estimate(x1, x2)
        lines.append(EstimateLine(estimator=label, first=first, second=second))
    return lines


def _check_format(fmt: str) -> None:
    if fmt not in ("csv", "json"):
        raise typer.BadParameter(f"--format must be csv or json, got {fmt!r}")


def _path(output: Optional[Path]) -> str | None:
    return None if output is None else str(output)


def _emit(text: str, output: Optional[Path]) -> None:
    if output is None:
        typer.echo(text, nl=False)
        return
    output.write_text(text, encoding="utf-8")
    logger.info("Wrote %s", output)


def _table_text(config: RunConfig, rows: list[RiskRow] | list[ExactRiskRow]) -> str:
    if config.format == "json":
        table = RiskTable(config=config, rows=rows)
        return table.model_dump_json(by_alias=True, indent=2) + "\n"
    frame = pd.DataFrame([row.model_dump(by_alias=True) for row in rows])
    body = frame.to_csv(index=False, float_format="%.10g", lineterminator="\n")
    return config.header() + body


def _estimate_lines(lines: list[EstimateLine]) -> str:
    return "".join(
        f"{line.estimator:<12} {format_pair(line.first, line.second)}\n"
        for line in lines
    )


def cmd_estimate(
    x1: float = typer.Option(..., "--x1", help="Observed X1."),
    x2: float = typer.Option(..., "--x2", help="Observed X2."),
    sigma: Optional[float] = _sigma_option(),
    sigma2: Optional[float] = _sigma2_option(),
    rho: float = _rho_option(),
    output: Optional[Path] = _output_option(),
    fmt: str = _format_option(),
) -> None:
    """Print the BLEE, the restricted MLE and both Brewster-Zidek type estimates."""
    _check_format(fmt)
    model = resolve_model(sigma, sigma2, rho)
    config = RunConfig(
        command="estimate",
        sigma=model.sigma,
        rho=model.rho,
        x1=x1,
        x2=x2,
        format=fmt,
        output=_path(output),
    )
    logger.info("Request estimate for (%s, %s) under %r", x1, x2, model)
    lines = standard_estimates(model, x1, x2)
    if fmt == "json":
        report = EstimateReport(config=config, estimates=lines)
        _emit(report.model_dump_json(indent=2) + "\n", output)
    else:
        _emit(config.header() + _estimate_lines(lines), output)


def cmd_simulate(
    sigma: Optional[float] = _sigma_option(),
    sigma2: Optional[float] = _sigma2_option(),
    rho: float = _rho_option(),
    loss: str = typer.Option("squared", "--loss", help="squared, absolute or quartic."),
    estimators: str = typer.Option(DEFAULT_ESTIMATORS, "--estimators"),
    lambda_min: Optional[float] = typer.Option(None, "--lambda-min"),
    lambda_max: Optional[float] = typer.Option(None, "--lambda-max"),
    lambda_step: Optional[float] = typer.Option(None, "--lambda-step"),
    n: int = typer.Option(DEFAULT_SAMPLES, "--n", help="Samples per lambda."),
    seed: int = typer.Option(DEFAULT_SEED, "--seed"),
    workers: int = typer.Option(DEFAULT_WORKERS, "--workers", min=1),
    output: Optional[Path] = _output_option(),
    fmt: str = _format_option(),
) -> None:
    """Monte Carlo risk table, one row per (lambda, estimator)."""
    _check_format(fmt)
    model = resolve_model(sigma, sigma2, rho)
    chosen_loss = risk_loss(loss)
    grid, low, high, step = lambda_grid(model, lambda_min, lambda_max, lambda_step)
    config = RunConfig(
        command="simulate",
        sigma=model.sigma,
        rho=model.rho,
        loss=loss,
        estimators=estimator_names(estimators),
        lambda_min=low,
        lambda_max=high,
        lambda_step=step,
        n=n,
        seed=seed,
        workers=workers,
        format=fmt,
        output=_path(output),
    )
    chosen = parse_estimators(estimators, model, chosen_loss)
    logger.info("Request simulate: %s", config.model_dump_json())
    rows = dominance_report(model, chosen, chosen_loss, grid, n, seed, workers=workers)
    _emit(_table_text(config, rows), output)


def cmd_exact(
    sigma: Optional[float] = _sigma_option(),
    sigma2: Optional[float] = _sigma2_option(),
    rho: float = _rho_option(),
    loss: str = typer.Option("squared", "--loss", help="squared, absolute or quartic."),
    estimators: str = typer.Option(DEFAULT_ESTIMATORS, "--estimators"),
    lambda_min: Optional[float] = typer.Option(None, "--lambda-min"),
    lambda_max: Optional[float] = typer.Option(None, "--lambda-max"),
    lambda_step: Optional[float] = typer.Option(None, "--lambda-step"),
    tol: float = typer.Option(RISK_TOL, "--tol", help="Quadrature tolerance."),
    workers: int = typer.Option(DEFAULT_WORKERS, "--workers", min=1),
    output: Optional[Path] = _output_option(),
    fmt: str = _format_option(),
) -> None:
    """Exact risk table by quadrature, one row per (lambda, estimator)."""
    _check_format(fmt)
    model = resolve_model(sigma, sigma2, rho)
    chosen_loss = risk_loss(loss)
    grid, low, high, step = lambda_grid(model, lambda_min, lambda_max, lambda_step)
    config = RunConfig(
        command="exact",
        sigma=model.sigma,
        rho=model.rho,
        loss=loss,
        estimators=estimator_names(estimators),
        lambda_min=low,
        lambda_max=high,
        lambda_step=step,
        tol=tol,
        workers=workers,
        format=fmt,
        output=_path(output),
    )
    chosen = parse_estimators(estimators, model, chosen_loss)
    logger.info("Request exact risk: %s", config.model_dump_json())
    rows = exact_report(model, chosen, chosen_loss, grid, tol, workers=workers)
    _emit(_table_text(config, rows), output)


def reference_notes(lines: list[EstimateLine]) -> list[str]:
    notes = []
    for line in lines:
        published = DENTAL_REFERENCE.get(line.estimator)
        if published is None:
            continue
        gap = max(abs(line.first - published[0]), abs(line.second - published[1]))
        verdict = "within" if gap <= REFERENCE_TOLERANCE else "outside"
        notes.append(
            f"{line.estimator}: computed {format_pair(line.first, line.second)}, "
            f"published {format_pair(*published)}, largest difference {gap:.4f} "
            f"({verdict} {REFERENCE_TOLERANCE})"
        )
    return notes


def cmd_analyze(
    input_path: Path = typer.Option(..., "--input", help="CSV with header group,x1,x2."),
    sigma: Optional[float] = _sigma_option(),
    sigma2: Optional[float] = _sigma2_option(),
    rho: float = _rho_option(),
    output: Optional[Path] = _output_option(),
    fmt: str = _format_option(),
) -> None:
    """Summarize a paired dataset and estimate the ordered means at its column means."""
    _check_format(fmt)
    model = resolve_model(sigma, sigma2, rho)
    config = RunConfig(
        command="analyze",
        sigma=model.sigma,
        rho=model.rho,
        input=str(input_path),
        format=fmt,
        output=_path(output),
    )
    logger.info("Request analyze %s under %r", input_path, model)
    summary = summarize(load_csv(input_path))
    lines = standard_estimates(model, summary.mean1, summary.mean2)

    published = DENTAL_REFERENCE["means"]
    observed = (summary.mean1, summary.mean2)
    matches = all(abs(a - b) < REFERENCE_MATCH for a, b in zip(observed, published))
    reference = DENTAL_REFERENCE if matches else None

    if fmt == "json":
        report = AnalysisReport(
            config=config, summary=summary, estimates=lines, reference=reference
        )
        _emit(report.model_dump_json(indent=2) + "\n", output)
        return

    if summary.correlation is None:
        correlation = "undefined (degenerate)"
    else:
        correlation = f"{summary.correlation:.6g}"
    text = [
        config.header(),
        f"{'n':<12} {summary.n}\n",
        f"{'mean':<12} {format_pair(summary.mean1, summary.mean2)}\n",
        f"{'variance':<12} {format_pair(summary.var1, summary.var2)}\n",
        f"{'pooled':<12} {summary.pooled_variance:.6g}\n",
        f"{'correlation':<12} {correlation}\n",
        _estimate_lines(lines),
    ]
    if reference is not None:
        text.extend(f"# {note}\n" for note in reference_notes(lines))
    _emit("".join(text), output)


def _report_lines(report: CheckReport) -> str:
    lines = [f"{'PASS' if report.passed else 'FAIL'} {report.name}\n"]
    for clause in report.failed_clauses():
        where = f", witness {clause.witness}" if clause.witness else ""
        detail = f", {clause.detail}" if clause.detail else ""
        lines.append(
            f"     {clause.name}: max violation {clause.max_violation:.3g}{where}{detail}\n"
        )
    return "".join(lines)


def cmd_verify(
    sigma: Optional[float] = _sigma_option(),
    sigma2: Optional[float] = _sigma2_option(),
    rho: float = _rho_option(),
    loss: Optional[List[str]] = typer.Option(
        None, "--loss", help="Loss to check, repeatable (default squared and absolute)."
    ),
    quick: bool = typer.Option(False, "--quick", help="Reduced grids."),
    output: Optional[Path] = _output_option(),
    fmt: str = _format_option(),
) -> None:
    """Run the numeric verification battery; exit code 3 when any check fails."""
    _check_format(fmt)
    model = resolve_model(sigma, sigma2, rho)
    names = list(loss) if loss else DEFAULT_VERIFY_LOSSES
    losses = [get_loss(name) for name in names]
    config = RunConfig(
        command="verify",
        sigma=model.sigma,
        rho=model.rho,
        loss=",".join(names),
        quick=quick,
        format=fmt,
        output=_path(output),
    )
    logger.info("Request verify: %s", config.model_dump_json())
    result = VerificationReport(config=config, reports=run_battery(model, losses, quick))

    if fmt == "json":
        _emit(result.model_dump_json(indent=2) + "\n", output)
    else:
        body = "".join(_report_lines(report) for report in result.reports)
        _emit(config.header() + body, output)

    if not result.passed:
        failed = [report.name for report in result.reports if not report.passed]
        logger.error("Verification failed: %s", ", ".join(failed))
        raise typer.Exit(code=EXIT_VERIFICATION)
