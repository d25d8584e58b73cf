from typing import Any, Callable, NamedTuple, Sequence

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel
from scipy.interpolate import PchipInterpolator

from ordest.errors import DomainError
from ordest.schemas import CheckClause, CheckReport

ShiftFunction = Callable[[np.ndarray], np.ndarray]

# grid on which candidate shifts are checked against a reference
DEFAULT_RELAX_GRID = np.linspace(-10.0, 10.0, 401)


class PsiEstimator(BaseModel):
    """
    A location equivariant estimator (X1 - psi(D), X2 + psi(D)) with D = X2 - X1,
    fully described by its shift function psi. psi takes and returns numpy
    arrays of the same shape.
    """

    psi: ShiftFunction
    name: str
    metadata: dict[str, Any] = {}

    model_config = {"frozen": True}

    def shift(self, t: ArrayLike) -> float | np.ndarray:
        values = np.asarray(t, dtype=float)
        shifted = np.broadcast_to(np.asarray(self.psi(values), dtype=float), values.shape)
        return float(shifted) if shifted.ndim == 0 else np.array(shifted)

    def estimate(
        self, x1: ArrayLike, x2: ArrayLike
    ) -> tuple[float, float] | tuple[np.ndarray, np.ndarray]:
        first, second = np.asarray(x1, dtype=float), np.asarray(x2, dtype=float)
        if not (np.all(np.isfinite(first)) and np.all(np.isfinite(second))):
            raise DomainError("estimates need finite observations")
        psi = self.shift(second - first)
        first, second = first - psi, second + psi
        if np.ndim(first) == 0:
            return float(first), float(second)
        return first, second

    def tabulate(
        self,
        nodes: Sequence[float],
        *,
        right_tail: ShiftFunction | None = None,
        name: str | None = None,
    ) -> "PsiEstimator":
        """Same estimator with psi replaced by its monotone interpolant on the nodes."""
        nodes = np.asarray(nodes, dtype=float)
        return PsiEstimator(
            psi=TabulatedShift(nodes, self.shift(nodes), right_tail=right_tail),
            name=name or self.name,
            metadata={**self.metadata, "tabulated": len(nodes)},
        )

    def __repr__(self) -> str:
        return f"<PsiEstimator(name={self.name!r})>"


class RelaxResult(NamedTuple):
    estimator: PsiEstimator | None
    report: CheckReport


def worst_clause(
    name: str, violations: np.ndarray, t: np.ndarray, tol: float
) -> CheckClause:
    """Clause that fails when the largest violation on the grid exceeds tol."""
    index = int(np.argmax(violations))
    magnitude = max(float(violations[index]), 0.0)
    return CheckClause(
        name=name,
        passed=magnitude <= tol,
        max_violation=magnitude,
        witness=[float(t[index])] if magnitude > tol else None,
    )


class TabulatedShift:
    """
    psi given by values at increasing nodes, joined by a monotone piecewise cubic.
    Right of the last node psi follows right_tail (0 when not given); left of the
    first node it continues linearly with slope left_slope.
    """

    def __init__(
        self,
        nodes: Sequence[float],
        values: Sequence[float],
        right_tail: ShiftFunction | None = None,
        left_slope: float = -0.5,
    ) -> None:
        self.nodes = np.asarray(nodes, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.nodes.ndim != 1 or len(self.nodes) < 2:
            raise DomainError("a tabulated shift needs at least two nodes")
        if self.nodes.shape != self.values.shape:
            raise DomainError("nodes and values differ in length")
        if np.any(np.diff(self.nodes) <= 0):
            raise DomainError("nodes must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("tabulated values must be finite")
        self.right_tail = right_tail
        self.left_slope = left_slope
        self._interpolant = PchipInterpolator(self.nodes, self.values, extrapolate=False)

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        flat = np.atleast_1d(t).ravel()
        out = np.empty_like(flat)

        first, last = self.nodes[0], self.nodes[-1]
        left, right = flat < first, flat > last
        inside = ~(left | right)
        out[inside] = self._interpolant(flat[inside])
        out[left] = self.values[0] + self.left_slope * (flat[left] - first)
        if self.right_tail is None:
            out[right] = 0.0
        else:
            out[right] = self.right_tail(flat[right])
        return out.reshape(t.shape)

    def __repr__(self) -> str:
        return (
            f"<TabulatedShift(nodes={len(self.nodes)}, "
            f"range=[{self.nodes[0]:g}, {self.nodes[-1]:g}])>"
        )


def estimate(
    e: PsiEstimator, x1: ArrayLike, x2: ArrayLike
) -> tuple[float, float] | tuple[np.ndarray, np.ndarray]:
    return e.estimate(x1, x2)
