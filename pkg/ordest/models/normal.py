import math
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike
from pydantic import Field
from scipy import special

from ordest.config import WINDOW_SCALES
from ordest.models.base import AbstractLocationFamily, DifferenceSlice, TruncatedMarginal
from ordest.models.density import SymmetricDensity
from ordest.numerics import LOG_SQRT_2PI


class NormalLocationModel(AbstractLocationFamily):
    """Bivariate normal errors with common known sigma and known correlation rho."""

    sigma: float = Field(gt=0)
    rho: float = Field(gt=-1.0, lt=1.0)

    @property
    def scale(self) -> float:
        return self.sigma

    @property
    def tau(self) -> float:
        return self.sigma * math.sqrt(2.0 * (1.0 - self.rho))

    @property
    def difference_scale(self) -> float:
        return self.tau

    @property
    def conditional_scale(self) -> float:
        """Standard deviation of Z2 given Z1."""
        return self.sigma * math.sqrt(1.0 - self.rho * self.rho)

    @property
    def slice_scale(self) -> float:
        """Standard deviation of Z1 given Z2 - Z1."""
        return self.sigma * math.sqrt(0.5 * (1.0 + self.rho))

    def pdf(self, z1: ArrayLike, z2: ArrayLike) -> float | np.ndarray:
        one_minus_rho2 = 1.0 - self.rho * self.rho
        quadratic = (
            np.multiply(z1, z1) - 2.0 * self.rho * np.multiply(z1, z2) + np.multiply(z2, z2)
        )
        norm = 2.0 * math.pi * self.sigma**2 * math.sqrt(one_minus_rho2)
        return np.exp(-quadratic / (2.0 * one_minus_rho2 * self.sigma**2)) / norm

    def partial_cdf_h(self, t: float) -> Callable[[ArrayLike], float | np.ndarray]:
        sigma, shrink, k = self.sigma, 1.0 - self.rho, self.conditional_scale

        def h(s: ArrayLike) -> float | np.ndarray:
            u = np.divide(s, sigma)
            return (
                np.exp(-0.5 * u * u - LOG_SQRT_2PI)
                / sigma
                * special.ndtr((t + np.multiply(s, shrink)) / k)
            )

        return h

    def truncated_marginal(self, t: float) -> TruncatedMarginal:
        lower, upper = self.marginal_window(t)
        sigma, shrink, k = self.sigma, 1.0 - self.rho, self.conditional_scale
        log_mass = float(special.log_ndtr(t / self.tau))
        offset = LOG_SQRT_2PI + math.log(sigma) + log_mass

        def pdf(s: float) -> float:
            u = s / sigma
            return math.exp(
                -0.5 * u * u - offset + special.log_ndtr((t + s * shrink) / k)
            )

        return TruncatedMarginal(pdf, lower, upper, math.exp(log_mass))

    def difference_slice(self, u: float) -> DifferenceSlice:
        # f(s, s + u) = density of D at u times density of Z1 given D = u
        tau, spread = self.tau, self.slice_scale
        center = -0.5 * u
        log_weight = -0.5 * (u / tau) ** 2 - 2.0 * LOG_SQRT_2PI - math.log(tau * spread)

        def pdf(s: float) -> float:
            v = (s - center) / spread
            return math.exp(log_weight - 0.5 * v * v)

        radius = WINDOW_SCALES * spread
        return DifferenceSlice(pdf, center - radius, center + radius)

    def __repr__(self) -> str:
        return f"<NormalLocationModel(sigma={self.sigma}, rho={self.rho})>"


def normal_density(model: NormalLocationModel) -> SymmetricDensity:
    """The model's density as an opaque SymmetricDensity (no closed forms attached)."""
    return SymmetricDensity(
        density=model.pdf,
        marginal_scale=model.sigma,
        name=f"normal(sigma={model.sigma:g}, rho={model.rho:g})",
    )


def partial_cdf_h(model: NormalLocationModel, t: float) -> Callable:
    return model.partial_cdf_h(t)
