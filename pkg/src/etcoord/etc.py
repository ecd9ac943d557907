"""Event-triggered communication core.

Between transmissions, every party that cares about agent j (its neighbors
downstream, and agent j itself for trigger monitoring) runs an identical
estimator seeded by j's last transmitted state.  The estimator assumes j
merely damps its pace toward the globally known desired pace profile; the
gap between that assumption and j's true evolution is the estimation error.
When the error magnitude exceeds the threshold function, j samples its true
state, broadcasts it, and every replica resets to the transmitted values.

Propagation uses the exact closed form of the estimator dynamics rather than
numerical integration, so sender and receivers agree bit-for-bit and replicas
can never drift apart on an ideal channel.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, TextIO

__all__ = [
    "ThresholdFunction",
    "PaceProfile",
    "EstimatorState",
    "EventRecord",
    "EstimatorBank",
    "propagate_scalar",
    "propagate_estimator",
    "estimation_error",
    "check_trigger",
    "fire_event",
    "write_event_log",
    "read_event_log",
    "event_log_lines",
]


@dataclass(frozen=True)
class ThresholdFunction:
    """Trigger level h(t) = c1 + c2 * exp(-c3 * t).

    c1 > 0 is the floor, c2 >= 0 an initial surplus decaying at rate c3 >= 0,
    so c1 <= h(t) <= c1 + c2 for all t >= 0.
    """

    c1: float
    c2: float = 0.0
    c3: float = 0.0

    def __post_init__(self):
        if not (self.c1 > 0):
            raise ValueError(f"threshold floor c1 must be positive, got {self.c1!r}")
        if self.c2 < 0 or self.c3 < 0:
            raise ValueError("threshold c2 and c3 must be nonnegative")

    def value(self, t: float) -> float:
        return self.c1 + self.c2 * math.exp(-self.c3 * t)


@dataclass(frozen=True)
class PaceProfile:
    """Piecewise-constant desired pace, right-continuous at breakpoints.

    ``times`` starts at 0 and is strictly increasing; ``values`` are the pace
    levels holding from each breakpoint until the next.  All levels positive.
    """

    times: tuple
    values: tuple

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        values = tuple(float(v) for v in self.values)
        if len(times) != len(values) or not times:
            raise ValueError("pace profile needs matching, nonempty times and values")
        if times[0] != 0.0:
            raise ValueError("pace profile must start at t = 0")
        if any(t1 >= t2 for t1, t2 in zip(times, times[1:])):
            raise ValueError("pace breakpoints must be strictly increasing")
        if any(v <= 0 for v in values):
            raise ValueError("pace values must be positive")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, value: float) -> "PaceProfile":
        return cls((0.0,), (float(value),))

    @classmethod
    def from_breakpoints(cls, breakpoints) -> "PaceProfile":
        pairs = [(float(t), float(v)) for t, v in breakpoints]
        return cls(tuple(t for t, _ in pairs), tuple(v for _, v in pairs))

    def value(self, t: float) -> float:
        seg = len(self.times) - 1
        for z, tz in enumerate(self.times):
            if tz > t:
                seg = z - 1
                break
        if seg < 0:
            raise ValueError(f"pace profile queried before t = 0 (t = {t})")
        return self.values[seg]


def propagate_scalar(t_k, g_k, v_k, t, b, pace_t, pace_v):
    """Closed-form estimator propagation from reset anchor (t_k, g_k, v_k) to t.

    Within a segment of constant pace c the estimated rate relaxes as
        v(t) = c + (v_k - c) * exp(-b (t - t_k))
    and the estimate integrates to
        g(t) = g_k + c (t - t_k) + (v_k - c) (1 - exp(-b (t - t_k))) / b.
    Segments are composed exactly at each pace breakpoint.

    The compiled step kernel mirrors this function operation-for-operation;
    any change here must be transcribed there.
    """
    if t < t_k:
        raise ValueError(f"cannot propagate backwards: t = {t} < t_k = {t_k}")
    n_seg = len(pace_t)
    seg = n_seg - 1
    for z in range(n_seg):
        if pace_t[z] > t_k:
            seg = z - 1
            break
    g = g_k
    v = v_k
    tc = t_k
    while True:
        if seg + 1 < n_seg and pace_t[seg + 1] < t:
            te = pace_t[seg + 1]
        else:
            te = t
        c = pace_v[seg]
        d = te - tc
        if d > 0.0:
            decay = math.exp(-b * d)
            g = g + c * d + (v - c) * (1.0 - decay) / b
            v = c + (v - c) * decay
        tc = te
        if te >= t:
            break
        seg += 1
    return g, v


@dataclass(frozen=True)
class EstimatorState:
    """Reset anchor of one replica: the state transmitted at event k, time t_k.

    At t = t_k the propagated estimate equals the transmitted pair exactly.
    """

    gamma_hat: float
    gamma_hat_dot: float
    t_k: float
    k: int


def propagate_estimator(est: EstimatorState, pace: PaceProfile, t: float, b: float):
    """Estimated (gamma, gamma_dot) of the observed agent at time t >= est.t_k."""
    return propagate_scalar(est.t_k, est.gamma_hat, est.gamma_hat_dot, t, b, pace.times, pace.values)


def estimation_error(est: EstimatorState, pace: PaceProfile, t: float, b: float, gamma_true: float) -> float:
    """Estimate minus truth at time t.

    Positive when the true agent has fallen behind its estimate (e.g. pushed
    back by headwinds).  Only the observed agent itself can evaluate this,
    since only it knows its own true state.
    """
    g_hat, _ = propagate_estimator(est, pace, t, b)
    return g_hat - gamma_true


def check_trigger(e: float, t: float, thr: ThresholdFunction) -> bool:
    """Strict comparison |e| - h(t) > 0; equality does not trigger.

    Written in subtraction form so every caller (including the step kernels)
    makes the identical floating-point decision.
    """
    return abs(e) - thr.value(t) > 0.0


@dataclass(frozen=True)
class EventRecord:
    """One broadcast: agent's k-th event at time t carrying (gamma, gamma_dot)."""

    t: float
    agent: int
    k: int
    gamma: float
    gamma_dot: float


class EstimatorBank:
    """Replica estimators held by one observer, keyed by observed agent id.

    The same class serves agent j's self-monitor (observing only j) and any
    receiver i (observing its in-neighborhood).  Replicas are pure functions
    of broadcast data, so banks fed the same events agree exactly.
    """

    def __init__(self, observed: Iterable, b: float, pace: PaceProfile):
        self.b = float(b)
        self.pace = pace
        self.states = {int(j): None for j in observed}

    def initialize(self, agent: int, t: float, gamma: float, gamma_dot: float):
        """Seed a replica from the initial broadcast (event index 0)."""
        self._require(agent)
        self.states[agent] = EstimatorState(gamma, gamma_dot, t, 0)

    def apply_event(self, ev: EventRecord):
        """Reset the replica for ev.agent to the transmitted state."""
        self._require(ev.agent)
        prev = self.states[ev.agent]
        if prev is not None and ev.t <= prev.t_k:
            raise ValueError(
                f"non-monotonic event time for agent {ev.agent}: {ev.t} after {prev.t_k}"
            )
        self.states[ev.agent] = EstimatorState(ev.gamma, ev.gamma_dot, ev.t, ev.k)

    def estimate(self, agent: int, t: float):
        """Propagated (gamma_hat, gamma_hat_dot) for an observed agent."""
        self._require(agent)
        st = self.states[agent]
        if st is None:
            raise ValueError(f"estimator for agent {agent} not initialized")
        return propagate_estimator(st, self.pace, t, self.b)

    def state(self, agent: int) -> EstimatorState:
        self._require(agent)
        return self.states[agent]

    def _require(self, agent: int):
        if agent not in self.states:
            raise KeyError(f"agent {agent} is not observed by this bank")


def fire_event(
    agent: int,
    t: float,
    gamma: float,
    gamma_dot: float,
    banks: Iterable,
    log: list,
) -> EventRecord:
    """Broadcast agent's true state: append a record, reset every replica.

    ``banks`` are all estimator banks observing the agent (the sender's own
    monitor plus each receiver's); delivery is instantaneous and lossless.
    The event index continues the sender's replica count.
    """
    banks = list(banks)
    sender_states = [
        bank.states[agent] for bank in banks if agent in bank.states and bank.states[agent] is not None
    ]
    k = (max(st.k for st in sender_states) + 1) if sender_states else 0
    ev = EventRecord(t=float(t), agent=int(agent), k=k, gamma=float(gamma), gamma_dot=float(gamma_dot))
    for bank in banks:
        if agent in bank.states:
            bank.apply_event(ev)
    log.append(ev)
    return ev


def event_log_lines(events: Iterable) -> Iterable:
    """Serialize events one record per line; floats round-trip bit-exactly."""
    for ev in events:
        yield json.dumps(
            {"t": ev.t, "agent": ev.agent, "k": ev.k, "gamma": ev.gamma, "gamma_dot": ev.gamma_dot}
        )


def write_event_log(fp: TextIO, events: Iterable):
    for line in event_log_lines(events):
        fp.write(line)
        fp.write("\n")


def read_event_log(fp: TextIO) -> list:
    events = []
    for line in fp:
        line = line.strip()
        if not line:
            continue
        d = json.loads(line)
        events.append(
            EventRecord(
                t=float(d["t"]),
                agent=int(d["agent"]),
                k=int(d["k"]),
                gamma=float(d["gamma"]),
                gamma_dot=float(d["gamma_dot"]),
            )
        )
    return events
