"""
Special functions, adaptive quadrature, bracketed root finding and seeded
bivariate normal sampling shared by the rest of the package.
"""

import logging
import math
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np
from numpy.typing import ArrayLike
from scipy import integrate as scipy_integrate
from scipy import optimize, special

from ordest.config import QUADRATURE_TOL, ROOT_MAX_EXPANSIONS, ROOT_TOL
from ordest.errors import (
    BracketError,
    DomainError,
    IntegrationError,
    RootFindingError,
)

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
MAX_SEED = 2**64 - 1

# quad reports roundoff or subdivision trouble even when its own error
# estimate is tiny; such results are accepted up to this factor of the request
ACCEPTED_ERROR_FACTOR = 100.0

logger = logging.getLogger(__name__)


class QuadratureResult(NamedTuple):
    value: float
    error: float
    evaluations: int


def _like_input(x: ArrayLike, values: np.ndarray) -> float | np.ndarray:
    return float(values) if np.ndim(x) == 0 else values


def std_normal_pdf(x: ArrayLike) -> float | np.ndarray:
    values = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(values)):
        raise DomainError("std_normal_pdf requires finite input")
    return _like_input(x, np.exp(-0.5 * values * values - LOG_SQRT_2PI))


def std_normal_cdf(x: ArrayLike) -> float | np.ndarray:
    values = np.asarray(x, dtype=float)
    if np.any(np.isnan(values)):
        raise DomainError("std_normal_cdf is undefined at NaN")
    return _like_input(x, special.ndtr(values))


def std_normal_quantile(p: ArrayLike) -> float | np.ndarray:
    values = np.asarray(p, dtype=float)
    if not np.all((values > 0.0) & (values < 1.0)):
        raise DomainError("std_normal_quantile requires 0 < p < 1")
    return _like_input(p, special.ndtri(values))


def log_std_normal_pdf(x: ArrayLike) -> float | np.ndarray:
    values = np.asarray(x, dtype=float)
    return _like_input(x, -0.5 * values * values - LOG_SQRT_2PI)


def log_std_normal_cdf(x: ArrayLike) -> float | np.ndarray:
    """log Phi(x), accurate far into the lower tail."""
    return _like_input(x, special.log_ndtr(np.asarray(x, dtype=float)))


def integrate(
    f: Callable[[float], float],
    lower: float,
    upper: float,
    tol: float = QUADRATURE_TOL,
    *,
    rel_tol: float = QUADRATURE_TOL,
    breakpoints: Iterable[float] = (),
    limit: int = 200,
) -> QuadratureResult:
    """
    Adaptive Gauss-Kronrod quadrature of f over (lower, upper). Either end may be
    infinite. The range is split at every breakpoint that falls inside it, so
    kinks and jumps of the integrand never sit in the interior of a panel.
    Converged when the error estimate is below max(tol, rel_tol * |value|);
    tol=0 asks for a purely relative tolerance.
    """
    if math.isnan(lower) or math.isnan(upper):
        raise DomainError("integration limits must not be NaN")
    if tol < 0 or rel_tol < 0 or (tol == 0 and rel_tol == 0):
        raise DomainError("integration tolerances must be non-negative, not both 0")
    if lower == upper:
        return QuadratureResult(0.0, 0.0, 0)
    if lower > upper:
        flipped = integrate(
            f, upper, lower, tol, rel_tol=rel_tol, breakpoints=breakpoints, limit=limit
        )
        return QuadratureResult(-flipped.value, flipped.error, flipped.evaluations)

    cuts = sorted({float(b) for b in breakpoints if lower < b < upper})
    edges = [lower, *cuts, upper]
    panel_tol = tol / (len(edges) - 1)
    value = error = 0.0
    evaluations = 0
    for a, b in zip(edges[:-1], edges[1:]):
        piece, piece_error, piece_evaluations = _quad_panel(
            f, a, b, panel_tol, rel_tol, limit
        )
        value += piece
        error += piece_error
        evaluations += piece_evaluations
    return QuadratureResult(value, error, evaluations)


def _quad_panel(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float,
    rel_tol: float,
    limit: int,
) -> tuple[float, float, int]:
    output = scipy_integrate.quad(
        f, a, b, epsabs=tol, epsrel=rel_tol, limit=limit, full_output=1
    )
    value, error, info = output[:3]
    if len(output) > 3:
        allowed = ACCEPTED_ERROR_FACTOR * max(tol, rel_tol * abs(value))
        if not math.isfinite(value) or error > allowed:
            raise IntegrationError(
                f"quadrature over [{a}, {b}] did not converge: {output[3]}",
                partial=value,
                error_estimate=error,
            )
        logger.debug(
            "Accepted quadrature over [%s, %s] with warning: %s", a, b, output[3]
        )
    return value, error, info["neval"]


def find_root(
    g: Callable[[float], float],
    bracket_lo: float,
    bracket_hi: float,
    tol: float = ROOT_TOL,
    *,
    expand: bool = False,
    max_expansions: int = ROOT_MAX_EXPANSIONS,
) -> float:
    """
    Brent's method on a sign-changing bracket. With expand=True the bracket is
    widened symmetrically, doubling its width each time, until g changes sign
    or max_expansions is exhausted.
    """
    lo, hi = float(bracket_lo), float(bracket_hi)
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
        raise BracketError("invalid bracket", [(lo, hi)])
    if tol <= 0:
        raise DomainError("root tolerance must be positive")

    attempts = [(lo, hi)]
    g_lo, g_hi = g(lo), g(hi)
    while g_lo * g_hi > 0:
        if not expand or len(attempts) > max_expansions:
            raise BracketError("g does not change sign on the bracket", attempts)
        width = hi - lo
        lo, hi = lo - 0.5 * width, hi + 0.5 * width
        g_lo, g_hi = g(lo), g(hi)
        attempts.append((lo, hi))
        logger.debug("Expanded root bracket to [%s, %s]", lo, hi)
    if math.isnan(g_lo) or math.isnan(g_hi):
        raise BracketError("g is NaN at the bracket ends", attempts)
    if g_lo == 0.0:
        return lo
    if g_hi == 0.0:
        return hi

    root, result = optimize.brentq(
        g, lo, hi, xtol=tol, maxiter=200, full_output=True, disp=False
    )
    if not result.converged:
        raise RootFindingError(
            f"brentq stopped after {result.iterations} iterations: {result.flag}"
        )
    return float(root)


class Rng:
    """
    Seeded PCG64 stream. Substreams are keyed by (seed, stream-index) through
    numpy's SeedSequence spawn keys, so they do not depend on the order or the
    thread in which they are drawn.
    """

    def __init__(self, seed: int, stream: Sequence[int] = ()) -> None:
        seed = int(seed)
        if not 0 <= seed <= MAX_SEED:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.stream = tuple(int(index) for index in stream)
        self._generator = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=self.stream))
        )

    def substream(self, index: int) -> "Rng":
        return Rng(self.seed, (*self.stream, index))

    def standard_normal(self, size: int | tuple[int, ...]) -> np.ndarray:
        return self._generator.standard_normal(size)

    def __repr__(self) -> str:
        return f"<Rng(seed={self.seed}, stream={self.stream})>"


def sample_bivariate_normal(
    rng: Rng, theta1: float, theta2: float, sigma: float, rho: float, n: int
) -> np.ndarray:
    """n draws of (X1, X2) ~ BVN(theta1, theta2, sigma^2, sigma^2, rho), shape (n, 2)."""
    if not (math.isfinite(theta1) and math.isfinite(theta2)):
        raise DomainError("means must be finite")
    if not (math.isfinite(sigma) and sigma > 0):
        raise DomainError(f"sigma must be positive, got {sigma}")
    if not -1.0 < rho < 1.0:
        raise DomainError(f"rho must lie in (-1, 1), got {rho}")
    if n < 0:
        raise DomainError(f"sample size must be non-negative, got {n}")

    z = rng.standard_normal((int(n), 2))
    x1 = theta1 + sigma * z[:, 0]
    x2 = theta2 + sigma * (rho * z[:, 0] + math.sqrt(1.0 - rho * rho) * z[:, 1])
    return np.column_stack((x1, x2))
