from pydantic import BaseModel, model_validator


class ThetaPoint(BaseModel):
    """A point (theta1, theta2) of the restricted space theta1 <= theta2."""

    theta1: float
    theta2: float

    model_config = {"frozen": True, "allow_inf_nan": False}

    @model_validator(mode="after")
    def check_order(self) -> "ThetaPoint":
        if self.theta1 > self.theta2:
            raise ValueError(
                f"theta1={self.theta1} exceeds theta2={self.theta2}; "
                "the order restriction theta1 <= theta2 is violated"
            )
        return self

    @property
    def lam(self) -> float:
        return self.theta2 - self.theta1

    @classmethod
    def canonical(cls, lam: float) -> "ThetaPoint":
        """Risks depend on theta only through lambda, so (0, lambda) stands for all."""
        return cls(theta1=0.0, theta2=lam)
