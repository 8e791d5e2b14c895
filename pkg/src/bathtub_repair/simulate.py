"""Monte Carlo generation of failure/repair trajectories.

Each replication draws from its own Philox stream keyed by ``(seed,
replication)``, so results do not depend on how replications are scheduled.
The counting loop used for estimation runs in the compiled ``_core``
extension when it is importable and falls back to the pure-Python samplers
below otherwise. Set ``BATHTUB_REPAIR_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Any, Iterable, Mapping, Optional, Sequence

import numpy as np

from .hazard import HazardSpec, cumulative, evaluate, inverse_cumulative
from .repair import (
    RepairEvent,
    VirtualAgeState,
    advance,
    apply_repair,
    check_degree,
    fmt,
)
from .result import EstimateResult

try:
    if os.environ.get("BATHTUB_REPAIR_PURE_PYTHON"):
        raise ImportError("pure-Python backend forced")
    from . import _core
except ImportError:
    _core = None

BACKEND = "cython" if _core is not None else "python"
SAMPLERS = ("inversion", "thinning")
_U64 = 1 << 64
_Z99 = NormalDist().inv_cdf(0.995)


# -- repair policies ---------------------------------------------------------


@dataclass(frozen=True)
class ConstantDegree:
    delta: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "delta", check_degree(self.delta))

    def degree(self, index: int, time: float, spec: HazardSpec) -> float:
        return self.delta

    def encode(self, spec: HazardSpec) -> tuple[tuple[float, ...], float, float]:
        return (), self.delta, math.inf

    def to_dict(self) -> dict[str, Any]:
        return {"type": "constant", "delta": self.delta}


@dataclass(frozen=True)
class FirstImperfectThenMinimal:
    """Degree ``delta1`` for a first failure at or before ``a1``; minimal otherwise."""

    delta1: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "delta1", check_degree(self.delta1))

    def degree(self, index: int, time: float, spec: HazardSpec) -> float:
        return self.delta1 if index == 0 and time <= spec.a1 else 0.0

    def encode(self, spec: HazardSpec) -> tuple[tuple[float, ...], float, float]:
        return (self.delta1,), 0.0, spec.a1

    def to_dict(self) -> dict[str, Any]:
        return {"type": "first_imperfect_then_minimal", "delta1": self.delta1}


@dataclass(frozen=True)
class DegreeSequence:
    deltas: tuple[float, ...]
    tail: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "deltas", tuple(check_degree(d) for d in self.deltas))
        object.__setattr__(self, "tail", check_degree(self.tail))

    def degree(self, index: int, time: float, spec: HazardSpec) -> float:
        return self.deltas[index] if index < len(self.deltas) else self.tail

    def encode(self, spec: HazardSpec) -> tuple[tuple[float, ...], float, float]:
        return self.deltas, self.tail, math.inf

    def to_dict(self) -> dict[str, Any]:
        return {"type": "sequence", "deltas": list(self.deltas), "tail": self.tail}


RepairPolicy = ConstantDegree | FirstImperfectThenMinimal | DegreeSequence


def policy_from_dict(data: Mapping[str, Any]) -> RepairPolicy:
    kind = data.get("type")
    if kind == "constant":
        return ConstantDegree(data["delta"])
    if kind == "first_imperfect_then_minimal":
        return FirstImperfectThenMinimal(data["delta1"])
    if kind == "sequence":
        return DegreeSequence(tuple(data["deltas"]), data.get("tail", 0.0))
    raise ValueError(f"unknown policy type {kind!r}")


# -- random streams ----------------------------------------------------------


@dataclass(frozen=True)
class RngStream:
    """Counter-based stream for one replication: Philox keyed by (seed, replication)."""

    seed: int
    replication: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.seed < _U64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if not 0 <= self.replication < _U64:
            raise ValueError(f"replication index out of range: {self.replication}")

    @property
    def key(self) -> int:
        return self.seed | (self.replication << 64)

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=self.key))


# -- trajectories ------------------------------------------------------------


@dataclass(frozen=True)
class Trajectory:
    failure_times: tuple[float, ...]
    events: tuple[RepairEvent, ...]
    horizon: float
    seed_info: Optional[RngStream] = None
    process: str = "virtual_age"

    def __post_init__(self) -> None:
        if len(self.failure_times) != len(self.events):
            raise ValueError("failure_times and events differ in length")

    @property
    def count(self) -> int:
        return len(self.failure_times)


def _check_horizon(horizon: float) -> float:
    horizon = float(horizon)
    if not (horizon > 0.0 and math.isfinite(horizon)):
        raise ValueError(f"horizon must be a positive finite time, got {horizon}")
    return horizon


def _core_params(spec: HazardSpec) -> tuple:
    return (spec.lam, spec.alpha1, spec.alpha2, spec.beta1, spec.beta2,
            spec.a1, spec.a2, spec.has_dfr, spec.has_ifr)


def _inverter(spec: HazardSpec):
    # the compiled inverse performs the same float operations as hazard.inverse_cumulative
    if _core is None:
        return lambda y: inverse_cumulative(spec, y)
    params = _core_params(spec)
    return lambda y: _core.inverse_cumulative(params, y)


def first_failure_from_draw(spec: HazardSpec, e: float) -> float:
    """First failure time for a unit-exponential draw ``e``."""
    return inverse_cumulative(spec, e)


def sample_first_failure(spec: HazardSpec, rng: RngStream | np.random.Generator) -> float:
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    return _inverter(spec)(gen.standard_exponential())


def _next_failure_inversion(spec, state, gen, horizon):
    e = gen.standard_exponential()
    while True:
        base = cumulative(spec, state.age)
        if not state.crossed_a1:
            # hazard budget available before the age reset at calendar a1
            cap = cumulative(spec, state.age + (spec.a1 - state.now)) - base
            if e > cap:
                if spec.a1 >= horizon:
                    return None
                e -= cap
                state = advance(state, spec.a1)
                continue
        age_fail = inverse_cumulative(spec, base + e)
        t_fail = state.now + (age_fail - state.age)
        if t_fail >= horizon:
            return None
        return advance(state, t_fail)


def _next_failure_thinning(spec, state, gen, horizon):
    while True:
        seg_end = horizon if state.crossed_a1 else min(spec.a1, horizon)
        # hazard is piecewise monotone in age, so the segment max sits at an endpoint
        try:
            bound = max(evaluate(spec, state.age), evaluate(spec, state.age + (seg_end - state.now)))
        except OverflowError:
            bound = math.inf
        if not math.isfinite(bound) or bound <= 0.0:
            raise ValueError(f"thinning majorant is not a positive finite rate: {bound}")
        t = state.now
        while True:
            t += gen.standard_exponential() / bound
            if t >= seg_end:
                break
            u = gen.random()
            if u * bound < evaluate(spec, state.age + (t - state.now)):
                return advance(state, t)
        if seg_end >= horizon:
            return None
        state = advance(state, seg_end)


def simulate_trajectory(
    spec: HazardSpec,
    policy: RepairPolicy,
    horizon: float,
    rng: RngStream,
    method: str = "inversion",
) -> Trajectory:
    """One realisation of the failure process with intensity ``evaluate(spec, A(t))`` on [0, horizon)."""
    horizon = _check_horizon(horizon)
    if method == "inversion":
        step = _next_failure_inversion
    elif method == "thinning":
        step = _next_failure_thinning
    else:
        raise ValueError(f"unknown sampler {method!r}, expected one of {SAMPLERS}")
    gen = rng.generator()
    state = VirtualAgeState.fresh(spec)
    while True:
        nxt = step(spec, state, gen, horizon)
        if nxt is None:
            break
        state = apply_repair(nxt, policy.degree(nxt.failures, nxt.now, spec))
    return Trajectory(
        failure_times=tuple(ev.time for ev in state.history),
        events=state.history,
        horizon=horizon,
        seed_info=rng,
    )


def simulate_nhpp(spec: HazardSpec, horizon: float, rng: RngStream) -> Trajectory:
    """Minimal-repair process: invert the cumulative hazard of a unit-rate Poisson stream."""
    horizon = _check_horizon(horizon)
    gen = rng.generator()
    invert = _inverter(spec)
    total = cumulative(spec, horizon)
    s = 0.0
    times = []
    while True:
        s += gen.standard_exponential()
        if s >= total:
            break
        times.append(invert(s))
    events = tuple(RepairEvent(t, t, 0.0, t) for t in times)
    return Trajectory(tuple(times), events, horizon, rng, process="nhpp")


def simulate_renewal(spec: HazardSpec, horizon: float, rng: RngStream) -> Trajectory:
    """Replacement after every failure: i.i.d. lifetimes summed up to the horizon.

    Events record the lifetime as ``age_before`` and an age of 0 after
    replacement; ``degree`` is 1 but the contraction rule does not apply.
    """
    horizon = _check_horizon(horizon)
    gen = rng.generator()
    invert = _inverter(spec)
    t = 0.0
    events = []
    while True:
        life = invert(gen.standard_exponential())
        t += life
        if t >= horizon:
            break
        events.append(RepairEvent(t, life, 1.0, 0.0))
    return Trajectory(tuple(ev.time for ev in events), tuple(events), horizon, rng, process="renewal")


# -- estimation ----------------------------------------------------------------


def _python_counts(spec, policy, horizon, seed, start, stop, method):
    return [
        simulate_trajectory(spec, policy, horizon, RngStream(seed, r), method).count
        for r in range(start, stop)
    ]


def count_failures(
    spec: HazardSpec,
    policy: RepairPolicy,
    horizon: float,
    seed: int,
    reps: int,
    method: str = "inversion",
    workers: int = 1,
    backend: Optional[str] = None,
    first_replication: int = 0,
) -> np.ndarray:
    """Failure counts for replications ``first_replication .. first_replication + reps - 1``."""
    horizon = _check_horizon(horizon)
    if method not in SAMPLERS:
        raise ValueError(f"unknown sampler {method!r}, expected one of {SAMPLERS}")
    RngStream(seed, first_replication + max(reps - 1, 0))
    backend = backend or BACKEND
    if backend == "cython":
        if _core is None:
            raise RuntimeError("compiled backend is not available")
        seq, tail, window = policy.encode(spec)
        params = _core_params(spec)

        def run(start, stop):
            return _core.count_failures(params, seq, tail, window, horizon, seed,
                                        start, stop - start, method == "thinning")
    elif backend == "python":
        def run(start, stop):
            return _python_counts(spec, policy, horizon, seed, start, stop, method)
    else:
        raise ValueError(f"unknown backend {backend!r}")

    counts = np.empty(reps, dtype=np.int64)
    workers = max(int(workers), 1)
    chunk = max(1, -(-reps // (4 * workers)))
    bounds = [(lo, min(lo + chunk, reps)) for lo in range(0, reps, chunk)]
    if workers == 1:
        for lo, hi in bounds:
            counts[lo:hi] = run(first_replication + lo, first_replication + hi)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [(lo, hi, pool.submit(run, first_replication + lo, first_replication + hi))
                       for lo, hi in bounds]
            for lo, hi, fut in futures:
                counts[lo:hi] = fut.result()
    return counts


def summarize_counts(counts: np.ndarray, seed: int, sampler: str) -> EstimateResult:
    n = int(len(counts))
    if n < 1:
        raise ValueError("need at least one replication")
    mean = float(np.mean(counts))
    meta = {"reps": n, "seed": seed, "sampler": sampler, "confidence": 0.99}
    if n == 1:
        return EstimateResult(mean, "monte_carlo", None, meta)
    se = float(np.std(counts, ddof=1)) / math.sqrt(n)
    half = _Z99 * se
    return EstimateResult(mean, "monte_carlo", half, meta, std_error=se,
                          ci_low=mean - half, ci_high=mean + half)


def estimate_expected_failures_mc(
    spec: HazardSpec,
    policy: RepairPolicy,
    horizon: float,
    reps: int,
    seed: int,
    method: str = "inversion",
    workers: int = 1,
    backend: Optional[str] = None,
) -> EstimateResult:
    """Mean failure count on [0, horizon) over ``reps`` replications with a 99% normal CI."""
    if int(reps) < 2:
        raise ValueError(f"need at least 2 replications, got {reps}")
    counts = count_failures(spec, policy, horizon, seed, int(reps), method, workers, backend)
    return summarize_counts(counts, seed, method)


def trajectories_to_csv(trajectories: Iterable[Trajectory]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["replication", "index", "time", "degree", "age_after"])
    for k, traj in enumerate(trajectories):
        rep = traj.seed_info.replication if traj.seed_info is not None else k
        for i, ev in enumerate(traj.events):
            writer.writerow([rep, i, fmt(ev.time), fmt(ev.degree), fmt(ev.age_after)])
    return buf.getvalue()
