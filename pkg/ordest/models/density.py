from typing import Callable

from pydantic import Field

from ordest.models.base import AbstractLocationFamily


class SymmetricDensity(AbstractLocationFamily):
    """
    A general error density f(z1, z2), assumed exchangeable and centrally
    symmetric. The density is an opaque callable, so every integral over it is
    done by quadrature. Mass outside the square of half-width support_radius
    (12 marginal scales when not given) is treated as zero.
    """

    density: Callable[[float, float], float]
    marginal_scale: float = Field(default=1.0, gt=0)
    support_radius: float | None = Field(default=None, gt=0)
    name: str = "custom"
    normalization_tol: float = Field(default=1e-8, gt=0)

    @property
    def scale(self) -> float:
        return self.marginal_scale

    @property
    def window_radius(self) -> float:
        if self.support_radius is not None:
            return self.support_radius
        return super().window_radius

    def pdf(self, z1: float, z2: float) -> float:
        return float(self.density(z1, z2))

    def is_normalized(self) -> bool:
        return abs(self.total_mass() - 1.0) <= self.normalization_tol

    def __repr__(self) -> str:
        return f"<SymmetricDensity(name={self.name!r}, scale={self.marginal_scale})>"
