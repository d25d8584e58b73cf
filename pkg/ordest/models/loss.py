import math
from functools import partial
from typing import Callable, Literal

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel

from ordest.errors import DomainError


class Loss(BaseModel):
    """
    Componentwise loss L(theta, a) = W(a1 - theta1) + W(a2 - theta2). W and its
    almost-everywhere derivative are vectorized callables; custom losses must
    supply the derivative themselves.
    """

    w: Callable[[ArrayLike], ArrayLike]
    w_prime: Callable[[ArrayLike], ArrayLike]
    kind: Literal["squared", "absolute", "custom"]
    name: str

    model_config = {"frozen": True}

    def evaluate(
        self, theta1: float, theta2: float, a1: ArrayLike, a2: ArrayLike
    ) -> float | np.ndarray:
        return self.w(np.subtract(a1, theta1)) + self.w(np.subtract(a2, theta2))

    def __repr__(self) -> str:
        return f"<Loss(name={self.name!r}, kind={self.kind!r})>"


def _twice(t: ArrayLike) -> ArrayLike:
    return 2.0 * np.asarray(t, dtype=float)


def _power(p: float, t: ArrayLike) -> ArrayLike:
    return np.abs(t) ** p


def _power_prime(p: float, t: ArrayLike) -> ArrayLike:
    return p * np.sign(t) * np.abs(t) ** (p - 1.0)


def _identity(t: ArrayLike) -> ArrayLike:
    return np.asarray(t, dtype=float)


def _one(t: ArrayLike) -> ArrayLike:
    return np.ones_like(np.asarray(t, dtype=float))


def squared_loss() -> Loss:
    return Loss(w=np.square, w_prime=_twice, kind="squared", name="squared")


def absolute_loss() -> Loss:
    # sign(0) = 0 picks the midpoint of the subgradient at the kink
    return Loss(w=np.abs, w_prime=np.sign, kind="absolute", name="absolute")


def power_loss(p: float) -> Loss:
    if not (math.isfinite(p) and p > 1.0):
        raise DomainError(f"power loss needs a finite exponent p > 1, got {p}")
    return Loss(
        w=partial(_power, p),
        w_prime=partial(_power_prime, p),
        kind="custom",
        name=f"power:{p:g}",
    )


def custom_loss(
    w: Callable[[ArrayLike], ArrayLike],
    w_prime: Callable[[ArrayLike], ArrayLike],
    name: str = "custom",
) -> Loss:
    return Loss(w=w, w_prime=w_prime, kind="custom", name=name)


def linear_loss() -> Loss:
    """W(t) = t. Odd, so it violates the loss assumptions; kept for validator runs."""
    return custom_loss(_identity, _one, name="linear")


LOSSES: dict[str, Callable[[], Loss]] = {
    "squared": squared_loss,
    "absolute": absolute_loss,
    "quartic": partial(power_loss, 4.0),
    "linear": linear_loss,
}


def get_loss(name: str) -> Loss:
    try:
        return LOSSES[name]()
    except KeyError:
        raise DomainError(
            f"unknown loss {name!r}, expected one of {', '.join(LOSSES)}"
        ) from None
