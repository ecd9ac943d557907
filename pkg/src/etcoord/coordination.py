"""Per-agent virtual-time controller.

Each agent carries a virtual time (its progress coordinate along its own
trajectory) driven by a second-order law: damping of the pace toward the
desired profile, consensus coupling against the estimated progress of its
in-neighbors, and a coupling term that drags the virtual time toward the
vehicle whenever the vehicle is off its moving target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .algebra import GainSet, disagreement_projection


@dataclass(frozen=True)
class CoordinationState:
    """Virtual time in [0, t_f], its rate, and the arrival flag."""

    gamma: float
    gamma_dot: float
    done: bool = False


@dataclass(frozen=True)
class CoordinationErrorState:
    """Coordination error split into its two components.

    ``sync`` is the disagreement coordinate Q @ gamma (zero iff all virtual
    times agree); ``pace_error`` is gamma_dot - desired_pace (zero iff every
    agent runs at the desired pace); ``norm`` is the stacked Euclidean norm.
    """

    sync: np.ndarray
    pace_error: np.ndarray
    norm: float


def alpha_bar(p_d_dot, e_pf, k_pf: float, eta: float) -> float:
    """Path-error coupling into the virtual time.

    k_pf * <target velocity, path error> / (||target velocity|| + eta).
    Positive when the vehicle is ahead of its moving target along the motion
    direction (the virtual time then speeds up to catch up), negative when
    behind.  eta > 0 keeps the denominator away from zero.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    d = np.asarray(p_d_dot, dtype=float)
    e = np.asarray(e_pf, dtype=float)
    return k_pf * float(d @ e) / (float(np.linalg.norm(d)) + eta)


def coordination_accel(
    gamma: float,
    gamma_dot: float,
    neighbor_estimates: Iterable,
    desired_pace: float,
    gains: GainSet,
    alpha: float = 0.0,
) -> float:
    """Second-order control: -b*(pace error) - a*sum(gamma - estimates) + alpha."""
    coupling = 0.0
    for g_hat in neighbor_estimates:
        coupling += gamma - g_hat
    return -gains.b * (gamma_dot - desired_pace) - gains.a * coupling + alpha


def step_coordination(state: CoordinationState, accel: float, dt: float, t_f: float) -> CoordinationState:
    """Semi-implicit Euler step with clamping to [0, t_f].

    Rate first, then position with the new rate.  Hitting t_f clamps exactly,
    marks arrival, and freezes the state (the virtual target stops); done
    states pass through unchanged.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if not math.isfinite(accel):
        raise ValueError(f"non-finite coordination acceleration: {accel!r}")
    if state.done:
        return state
    v = state.gamma_dot + dt * accel
    g = state.gamma + dt * v
    if g >= t_f:
        return CoordinationState(gamma=t_f, gamma_dot=0.0, done=True)
    if g < 0.0:
        g = 0.0
    return replace(state, gamma=g, gamma_dot=v)


def coordination_error(gamma, gamma_dot, desired_pace: float) -> CoordinationErrorState:
    """Split the fleet state into disagreement and pace-error components.

    Invariant under a common shift of all virtual times (the disagreement
    projection annihilates the all-ones direction).
    """
    g = np.asarray(gamma, dtype=float)
    gd = np.asarray(gamma_dot, dtype=float)
    if g.shape != gd.shape or g.ndim != 1:
        raise ValueError(f"gamma and gamma_dot must be equal-length vectors, got {g.shape} and {gd.shape}")
    q = disagreement_projection(len(g))
    sync = q @ g
    pace_err = gd - desired_pace
    norm = math.sqrt(float(sync @ sync) + float(pace_err @ pace_err))
    return CoordinationErrorState(sync=sync, pace_error=pace_err, norm=norm)
