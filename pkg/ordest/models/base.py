import math
from abc import ABC, abstractmethod
from typing import Callable, NamedTuple, final

from pydantic import BaseModel

from ordest.config import QUADRATURE_TOL, WINDOW_SCALES
from ordest.errors import NumericalError
from ordest.numerics import integrate

# absolute tolerance that leaves the relative one in charge
NEGLIGIBLE = 1e-300


class TruncatedMarginal(NamedTuple):
    """Density of Z1 given Z2 - Z1 <= t, supported (numerically) on [lower, upper]."""

    pdf: Callable[[float], float]
    lower: float
    upper: float
    mass: float


class DifferenceSlice(NamedTuple):
    """s -> f(s, s + u) for a fixed u, negligible outside [lower, upper]."""

    pdf: Callable[[float], float]
    lower: float
    upper: float


def _zero(s: float) -> float:
    return 0.0


class AbstractLocationFamily(BaseModel, ABC):
    """
    Base for every error density f(z1, z2) = f(x1 - theta1, x2 - theta2) in the
    project. Contains the one- and two-dimensional integrals over f that the
    estimators and the risk engine are built from. Subclasses with closed forms
    override them.
    """

    model_config = {"frozen": True, "allow_inf_nan": False}

    @property
    @abstractmethod
    def scale(self) -> float:
        """Scale of the marginals of f."""

    @abstractmethod
    def pdf(self, z1: float, z2: float) -> float:
        pass

    @property
    def window_radius(self) -> float:
        return WINDOW_SCALES * self.scale

    @property
    def difference_scale(self) -> float:
        """Scale of D = Z2 - Z1."""
        return math.sqrt(2.0) * self.scale

    def partial_cdf_h(self, t: float) -> Callable[[float], float]:
        """s -> integral of f(s, s + y) over y <= t."""
        radius = self.window_radius

        def h(s: float) -> float:
            lower = -s - radius
            upper = min(t, -s + radius)
            if lower >= upper:
                return 0.0
            return integrate(
                lambda y: self.pdf(s, s + y),
                lower,
                upper,
                NEGLIGIBLE,
                rel_tol=QUADRATURE_TOL,
            ).value

        return h

    @final
    def marginal_window(self, t: float) -> tuple[float, float]:
        # given D <= t < 0 the mass of Z1 sits around -t/2
        center = -0.5 * t if t < 0 else 0.0
        return center - self.window_radius, center + self.window_radius

    def truncated_marginal(self, t: float) -> TruncatedMarginal:
        lower, upper = self.marginal_window(t)
        h = self.partial_cdf_h(t)
        mass = integrate(h, lower, upper, NEGLIGIBLE, rel_tol=QUADRATURE_TOL).value
        if not mass > 0:
            raise NumericalError(f"no probability mass left below t={t!r}")
        return TruncatedMarginal(lambda s: h(s) / mass, lower, upper, mass)

    def difference_slice(self, u: float) -> DifferenceSlice:
        radius = self.window_radius
        lower = max(-radius, -u - radius)
        upper = min(radius, -u + radius)
        if lower >= upper:
            return DifferenceSlice(_zero, 0.0, 0.0)
        return DifferenceSlice(lambda s: self.pdf(s, s + u), lower, upper)

    @final
    def total_mass(self) -> float:
        """Integral of f over the square of half-width window_radius."""
        radius = self.window_radius
        return integrate(
            lambda z1: integrate(
                lambda z2: self.pdf(z1, z2), -radius, radius, NEGLIGIBLE
            ).value,
            -radius,
            radius,
        ).value
