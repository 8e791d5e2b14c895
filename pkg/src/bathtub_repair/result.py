from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional


@dataclass(frozen=True)
class EstimateResult:
    """An estimate of the expected number of failures.

    ``method`` is ``"quadrature"`` or ``"monte_carlo"``. For quadrature the
    error bound is the integrator's own error estimate; for Monte Carlo it is
    the half-width of the 99% confidence interval (``None`` with one
    replication).
    """

    value: float
    method: str
    error_bound: Optional[float]
    metadata: dict[str, Any] = field(default_factory=dict)
    std_error: Optional[float] = None
    ci_low: Optional[float] = None
    ci_high: Optional[float] = None

    def __post_init__(self) -> None:
        if self.method not in ("quadrature", "monte_carlo"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.error_bound is not None and self.error_bound < 0.0:
            raise ValueError("error_bound must be >= 0")

    def contains(self, x: float) -> bool:
        if self.ci_low is None or self.ci_high is None:
            raise ValueError("estimate has no confidence interval")
        return self.ci_low <= x <= self.ci_high

    def to_dict(self) -> dict[str, Any]:
        if self.method == "monte_carlo":
            return {
                "mean": self.value,
                "std_error": self.std_error,
                "ci_low": self.ci_low,
                "ci_high": self.ci_high,
                "reps": self.metadata.get("reps"),
                "seed": self.metadata.get("seed"),
                "method": self.method,
                "sampler": self.metadata.get("sampler"),
                "value": self.value,
                "error_bound": self.error_bound,
            }
        return {
            "value": self.value,
            "method": self.method,
            "error_bound": self.error_bound,
            "metadata": dict(self.metadata),
        }
