from typing import Sequence

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2
EXIT_VERIFICATION = 3


class OrdestError(Exception):
    """Base class for every error raised by the package."""


class DomainError(OrdestError, ValueError):
    """An argument lies outside the domain of the operation."""


class NumericalError(OrdestError):
    """A numeric procedure failed to deliver a result within tolerance."""


class IntegrationError(NumericalError):
    def __init__(self, message: str, partial: float, error_estimate: float) -> None:
        super().__init__(
            f"{message} (partial estimate={partial!r}, error estimate={error_estimate!r})"
        )
        self.partial = partial
        self.error_estimate = error_estimate


class BracketError(NumericalError):
    def __init__(self, message: str, attempts: Sequence[tuple[float, float]]) -> None:
        last = attempts[-1] if attempts else None
        super().__init__(f"{message} after {len(attempts)} attempts, last={last}")
        self.attempts = list(attempts)


class RootFindingError(NumericalError):
    pass


class IerdConstructionError(NumericalError):
    def __init__(self, t: float, cause: Exception) -> None:
        super().__init__(f"root of k1(c|t) not found at t={t!r}: {cause}")
        self.t = t
        self.cause = cause


class DatasetError(OrdestError):
    def __init__(
        self, message: str, row: int | None = None, column: str | None = None
    ) -> None:
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.row = row
        self.column = column
