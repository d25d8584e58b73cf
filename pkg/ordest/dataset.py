import logging
import math
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import BaseModel

from ordest.errors import DatasetError, DomainError
from ordest.models.normal import NormalLocationModel
from ordest.schemas import DatasetSummary

NUMERIC_COLUMNS = ("x1", "x2")

logger = logging.getLogger(__name__)


class PairedRow(BaseModel):
    group: str
    x1: float
    x2: float

    model_config = {"frozen": True, "allow_inf_nan": False}


class PairedDataset(BaseModel):
    rows: list[PairedRow]
    columns: list[str]
    source: str | None = None

    model_config = {"frozen": True}

    @property
    def x1(self) -> np.ndarray:
        return np.array([row.x1 for row in self.rows])

    @property
    def x2(self) -> np.ndarray:
        return np.array([row.x2 for row in self.rows])

    def __len__(self) -> int:
        return len(self.rows)


def load_csv(path: str | Path) -> PairedDataset:
    """
    Read a `group,x1,x2` file. Rows in errors are numbered from 1 for the first
    line after the header. The group column is optional.
    """
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise DatasetError(f"{path} is empty") from None
    except pd.errors.ParserError as err:
        raise DatasetError(f"{path} is not valid CSV: {err}") from err
    except OSError as err:
        raise DatasetError(f"cannot read {path}: {err.strerror or err}") from err

    frame.columns = [str(column).strip() for column in frame.columns]
    missing = [column for column in NUMERIC_COLUMNS if column not in frame.columns]
    if missing:
        raise DatasetError(
            f"header of {path} lacks column(s) {', '.join(missing)}; "
            "expected a header row group,x1,x2"
        )
    if frame.empty:
        raise DatasetError(f"{path} has a header but no data rows")

    for column in NUMERIC_COLUMNS:
        cells = frame[column].str.strip()
        values = pd.to_numeric(cells, errors="coerce")
        bad = values.isna() | ~np.isfinite(values.astype(float))
        if bad.any():
            index = int(np.flatnonzero(bad.to_numpy())[0])
            raise DatasetError(
                f"malformed numeric cell {cells.iloc[index]!r}", row=index + 1, column=column
            )
        frame[column] = values.astype(float)

    groups = frame["group"].str.strip() if "group" in frame.columns else [""] * len(frame)
    rows = [
        PairedRow(group=group, x1=x1, x2=x2)
        for group, x1, x2 in zip(groups, frame["x1"], frame["x2"])
    ]
    logger.info("Loaded %d rows from %s", len(rows), path)
    return PairedDataset(rows=rows, columns=list(frame.columns), source=str(path))


def summarize(ds: PairedDataset) -> DatasetSummary:
    """
    Column means and sample variances (divisor n - 1), their average as the
    common variance, and the product-moment correlation. A constant column
    leaves the correlation undefined and marks the summary degenerate.
    """
    if len(ds) < 2:
        raise DatasetError(f"summary statistics need at least 2 rows, got {len(ds)}")
    x1, x2 = ds.x1, ds.x2
    var1, var2 = float(np.var(x1, ddof=1)), float(np.var(x2, ddof=1))

    correlation = None
    if var1 > 0 and var2 > 0:
        correlation = float(np.clip(np.corrcoef(x1, x2)[0, 1], -1.0, 1.0))
    else:
        logger.warning("Constant column in %s, correlation undefined", ds.source)
    return DatasetSummary(
        n=len(ds),
        mean1=float(np.mean(x1)),
        mean2=float(np.mean(x2)),
        var1=var1,
        var2=var2,
        pooled_variance=0.5 * (var1 + var2),
        correlation=correlation,
        degenerate=correlation is None,
    )


def plugin_model(sigma2: float, rho: float) -> NormalLocationModel:
    if not (math.isfinite(sigma2) and sigma2 > 0):
        raise DomainError(f"sigma^2 must be positive, got {sigma2}")
    if not (math.isfinite(rho) and -1.0 < rho < 1.0):
        raise DomainError(f"rho must lie in (-1, 1), got {rho}")
    return NormalLocationModel(sigma=math.sqrt(sigma2), rho=rho)
