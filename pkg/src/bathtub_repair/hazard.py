"""Bathtub-shaped baseline intensity: evaluation, cumulative hazard, inversion.

The family is piecewise::

    lam + alpha1 * (a1 - t) ** beta1     t <= a1      (decreasing)
    lam                                  a1 < t <= a2 (useful life)
    lam + alpha2 * (t - a2) ** beta2     t > a2       (increasing)

Either power phase can be switched off, which yields the degenerate
CFR / IFR / DFR shapes without infinite change points.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass
from typing import Any, Mapping

INVERSION_TOL = 1e-10
_MAX_NEWTON = 200

_JSON_KEYS = ("lambda", "alpha1", "alpha2", "beta1", "beta2", "a1", "a2")


class HazardShape(str, enum.Enum):
    CFR = "CFR"
    IFR = "IFR"
    DFR = "DFR"
    UFR = "UFR"
    BFR = "BFR"


@dataclass(frozen=True)
class HazardSpec:
    """Parameters of the bathtub baseline intensity.

    ``dfr_phase`` / ``ifr_phase`` switch the decreasing and increasing power
    terms on or off. ``allow_short_useful_life`` waives the requirement that
    the useful-life period be at least as long as the burn-in period
    (``a2 - a1 >= a1``).
    """

    lam: float
    alpha1: float
    alpha2: float
    beta1: float
    beta2: float
    a1: float
    a2: float
    allow_short_useful_life: bool = False
    dfr_phase: bool = True
    ifr_phase: bool = True

    def __post_init__(self) -> None:
        for name in ("lam", "alpha1", "alpha2", "beta1", "beta2", "a1", "a2"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise TypeError(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        for name in ("lam", "alpha1", "alpha2", "beta1", "beta2"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.a1 < 0.0:
            raise ValueError(f"a1 must be >= 0, got {self.a1}")
        if self.a2 < self.a1:
            raise ValueError(f"change points must satisfy a1 <= a2, got a1={self.a1}, a2={self.a2}")
        if not self.allow_short_useful_life and self.a2 - self.a1 < self.a1:
            raise ValueError(
                "useful life period must be at least as long as the burn-in period "
                f"(a2 - a1 >= a1), got a2 - a1 = {self.a2 - self.a1} < a1 = {self.a1}; "
                "set allow_short_useful_life to override"
            )

    @property
    def has_dfr(self) -> bool:
        return self.dfr_phase and self.a1 > 0.0

    @property
    def has_ifr(self) -> bool:
        return self.ifr_phase

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        out: dict[str, Any] = {"lambda": d.pop("lam")}
        for key in _JSON_KEYS[1:]:
            out[key] = d[key]
        if self.allow_short_useful_life:
            out["allow_short_useful_life"] = True
        # phase flags are written only when a phase is switched off
        if not self.dfr_phase:
            out["dfr_phase"] = False
        if not self.ifr_phase:
            out["ifr_phase"] = False
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "HazardSpec":
        allowed = set(_JSON_KEYS) | {"allow_short_useful_life", "dfr_phase", "ifr_phase"}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown hazard keys: {sorted(unknown)}")
        missing = [k for k in _JSON_KEYS if k not in data]
        if missing:
            raise ValueError(f"missing hazard keys: {missing}")
        flags = {}
        for key in ("allow_short_useful_life", "dfr_phase", "ifr_phase"):
            if key in data:
                if not isinstance(data[key], bool):
                    raise TypeError(f"{key} must be a boolean")
                flags[key] = data[key]
        return cls(
            lam=data["lambda"],
            alpha1=data["alpha1"],
            alpha2=data["alpha2"],
            beta1=data["beta1"],
            beta2=data["beta2"],
            a1=data["a1"],
            a2=data["a2"],
            **flags,
        )


#: The five-parameter worked example (change points 4 and 8).
BATHTUB_EXAMPLE = HazardSpec(lam=1.0, alpha1=0.6, alpha2=0.5, beta1=2.5, beta2=2.8, a1=4.0, a2=8.0)


def _check_time(t: float) -> float:
    t = float(t)
    if not t >= 0.0:
        raise ValueError(f"time must be >= 0, got {t}")
    return t


def evaluate(spec: HazardSpec, t: float) -> float:
    """Baseline intensity at time (or virtual age) ``t``."""
    t = _check_time(t)
    if t <= spec.a1:
        if spec.has_dfr:
            return spec.lam + spec.alpha1 * (spec.a1 - t) ** spec.beta1
        return spec.lam
    if t <= spec.a2 or not spec.has_ifr:
        return spec.lam
    return spec.lam + spec.alpha2 * (t - spec.a2) ** spec.beta2


def _cum_a1(spec: HazardSpec) -> float:
    if not spec.has_dfr:
        return spec.lam * spec.a1
    p = spec.beta1 + 1.0
    return spec.lam * spec.a1 + spec.alpha1 * spec.a1**p / p


def _cum_a2(spec: HazardSpec) -> float:
    return _cum_a1(spec) + spec.lam * (spec.a2 - spec.a1)


def cumulative(spec: HazardSpec, t: float) -> float:
    """Cumulative baseline hazard, integral of ``evaluate`` over [0, t]."""
    t = _check_time(t)
    if t <= spec.a1:
        if not spec.has_dfr:
            return spec.lam * t
        p = spec.beta1 + 1.0
        return spec.lam * t + spec.alpha1 * (spec.a1**p - (spec.a1 - t) ** p) / p
    if t <= spec.a2 or not spec.has_ifr:
        return _cum_a1(spec) + spec.lam * (t - spec.a1)
    q = spec.beta2 + 1.0
    return _cum_a2(spec) + spec.lam * (t - spec.a2) + spec.alpha2 * (t - spec.a2) ** q / q


def cumulative_between(spec: HazardSpec, s: float, t: float) -> float:
    if s > t:
        raise ValueError(f"need s <= t, got s={s}, t={t}")
    return max(cumulative(spec, t) - cumulative(spec, s), 0.0)


def _newton_bracketed(spec: HazardSpec, y: float, lo: float, hi: float, x: float) -> float:
    # safeguarded Newton on cumulative(x) - y; cumulative is increasing with derivative evaluate(x)
    tol = INVERSION_TOL * 1e-2 * max(1.0, y)
    for _ in range(_MAX_NEWTON):
        f = cumulative(spec, x) - y
        if abs(f) <= tol:
            return x
        if f > 0.0:
            hi = x
        else:
            lo = x
        step = f / evaluate(spec, x)
        nx = x - step
        if not lo < nx < hi:
            nx = 0.5 * (lo + hi)
        if nx == x or hi - lo <= 4.0 * math.ulp(max(hi, 1.0)):
            return nx
        x = nx
    return x


def inverse_cumulative(spec: HazardSpec, y: float) -> float:
    """Time ``t`` with ``cumulative(spec, t) == y`` to within 1e-10."""
    y = float(y)
    if not y >= 0.0:
        raise ValueError(f"cumulative hazard must be >= 0, got {y}")
    if y == 0.0:
        return 0.0
    c1 = _cum_a1(spec)
    if y <= c1:
        if not spec.has_dfr:
            return y / spec.lam
        return _newton_bracketed(spec, y, 0.0, spec.a1, y / evaluate(spec, 0.0))
    c2 = _cum_a2(spec)
    if y <= c2 or not spec.has_ifr:
        return spec.a1 + (y - c1) / spec.lam
    hi = spec.a2 + (y - c2) / spec.lam
    q = spec.beta2 + 1.0
    # power-term-only root is a good start, clipped into the bracket
    x = spec.a2 + min((q * (y - c2) / spec.alpha2) ** (1.0 / q), hi - spec.a2)
    return _newton_bracketed(spec, y, spec.a2, hi, x)


def classify(spec: HazardSpec) -> HazardShape:
    if spec.has_dfr and spec.has_ifr:
        return HazardShape.UFR if spec.a1 == spec.a2 else HazardShape.BFR
    if spec.has_dfr:
        return HazardShape.DFR
    if spec.has_ifr:
        return HazardShape.IFR
    return HazardShape.CFR
