"""Virtual-age bookkeeping for repairs of a bathtub-hazard system.

A repair of degree ``delta`` pulls the virtual age toward the first change
point ``a1`` (the age of best performance)::

    age_after - a1 = (1 - delta) * (age_before - a1)

so ``delta = 0`` is a minimal repair and ``delta = 1`` leaves the system at
``a1``. The first time calendar time reaches ``a1`` the virtual age is reset
to the calendar age.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .hazard import HazardSpec, evaluate


def check_degree(delta: float) -> float:
    """Validate a repair degree; worsening repairs and upgrades are rejected."""
    if isinstance(delta, bool):
        raise TypeError("repair degree must be a real number")
    delta = float(delta)
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"repair degree must lie in [0, 1], got {delta}")
    return delta


def contract_age(age: float, delta: float, a1: float) -> float:
    # exact at both ends: delta=0 keeps the age, delta=1 lands on a1
    if delta == 1.0:
        return a1
    return age - delta * (age - a1)


@dataclass(frozen=True)
class RepairEvent:
    time: float
    age_before: float
    degree: float
    age_after: float


@dataclass(frozen=True)
class VirtualAgeState:
    a1: float
    now: float = 0.0
    age: float = 0.0
    history: tuple[RepairEvent, ...] = field(default=())
    crossed_a1: bool = False

    @classmethod
    def fresh(cls, spec: HazardSpec) -> "VirtualAgeState":
        return cls(a1=spec.a1)

    @property
    def failures(self) -> int:
        return len(self.history)


def advance(state: VirtualAgeState, to: float) -> VirtualAgeState:
    """Let calendar time run to ``to``; the virtual age grows at unit rate.

    If the interval reaches ``a1`` for the first time, the age is reset to
    ``a1`` at that instant before continuing.
    """
    to = float(to)
    if to < state.now:
        raise ValueError(f"cannot move time backwards: now={state.now}, to={to}")
    if not state.crossed_a1 and to >= state.a1:
        return replace(state, now=to, age=state.a1 + (to - state.a1), crossed_a1=True)
    return replace(state, now=to, age=state.age + (to - state.now))


def apply_repair(state: VirtualAgeState, degree: float) -> VirtualAgeState:
    """Repair a failure occurring at ``state.now``; calendar time does not move."""
    degree = check_degree(degree)
    if state.history and state.now <= state.history[-1].time:
        raise ValueError(
            f"failure times must be strictly increasing, got {state.now} after {state.history[-1].time}"
        )
    age_after = contract_age(state.age, degree, state.a1)
    event = RepairEvent(time=state.now, age_before=state.age, degree=degree, age_after=age_after)
    return replace(state, age=age_after, history=state.history + (event,))


def conditional_intensity(state: VirtualAgeState, spec: HazardSpec) -> float:
    # before the first failure age == now, so one expression covers both cases
    return evaluate(spec, state.age)


def virtual_age_curve(
    events: Sequence[tuple[float, float]],
    spec: HazardSpec,
    grid: Sequence[float],
) -> list[tuple[float, float]]:
    """Sample the virtual age on ``grid`` by replaying ``(time, degree)`` repairs.

    A grid point equal to a repair time reports the post-repair age.
    """
    times = [float(t) for t, _ in events]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("event times must be strictly increasing")
    grid = [float(g) for g in grid]
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be sorted")
    if grid and grid[0] < 0.0:
        raise ValueError("grid times must be >= 0")

    state = VirtualAgeState.fresh(spec)
    out = []
    i = 0
    for g in grid:
        while i < len(events) and times[i] <= g:
            state = apply_repair(advance(state, times[i]), events[i][1])
            i += 1
        out.append((g, advance(state, g).age))
    return out


def events_to_csv(events: Iterable[RepairEvent]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["index", "time", "age_before", "degree", "age_after"])
    for i, ev in enumerate(events):
        writer.writerow([i, fmt(ev.time), fmt(ev.age_before), fmt(ev.degree), fmt(ev.age_after)])
    return buf.getvalue()


def fmt(x: float, digits: int = 12) -> str:
    """Decimal notation with ``digits`` significant digits, no exponent."""
    x = float(x)
    if x == 0.0 or not math.isfinite(x):
        return "0" if x == 0.0 else repr(x)
    decimals = max(digits - 1 - int(math.floor(math.log10(abs(x)))), 0)
    s = f"{x:.{decimals}f}"
    if "." in s:
        s = s.rstrip("0").rstrip(".")
    return s
