"""Kinematic vehicle stand-in with a bounded-error path-following law.

The vehicle is a first-order point-mass: commanded velocity is the moving
target's feedforward velocity plus proportional feedback on the path error,
with the speed saturated into [v_min, v_max].  It stands in for a full
vehicle-plus-autopilot stack; all the coordination layer requires of it is
that the path error stays within a known bound rho, which the engine checks
at every step and treats as a contract.

Disturbances are additive velocity vectors active on a time window; initial
displacement disturbances are expressed as nonzero starting offsets instead.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .bezier import BezierTrajectory, position, virtual_target_velocity


@dataclass(frozen=True)
class PFConfig:
    """Path-following gains and limits: k_p > 0, 0 <= v_min < v_max, rho > 0."""

    k_p: float
    v_min: float
    v_max: float
    rho: float

    def __post_init__(self):
        if not (self.k_p > 0):
            raise ValueError("k_p must be positive")
        if not (self.v_max > self.v_min >= 0):
            raise ValueError(f"need v_max > v_min >= 0, got [{self.v_min}, {self.v_max}]")
        if not (self.rho > 0):
            raise ValueError("rho must be positive")


@dataclass(frozen=True)
class DisturbanceWindow:
    """Additive velocity (m/s) applied while t_start <= t < t_end."""

    t_start: float
    t_end: float
    velocity: tuple

    def __post_init__(self):
        if not (self.t_start < self.t_end):
            raise ValueError(f"empty or inverted window [{self.t_start}, {self.t_end})")
        v = tuple(float(c) for c in self.velocity)
        if len(v) != 3:
            raise ValueError("disturbance velocity must be a 3-vector")
        object.__setattr__(self, "velocity", v)

    def active(self, t: float) -> bool:
        return self.t_start <= t < self.t_end


@dataclass(frozen=True)
class VehicleState:
    """Position plus the disturbance windows attached to this vehicle."""

    p: tuple
    disturbances: tuple = ()

    def __post_init__(self):
        p = tuple(float(c) for c in self.p)
        if len(p) != 3:
            raise ValueError("position must be a 3-vector")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "disturbances", tuple(self.disturbances))


def pf_error(p, traj: BezierTrajectory, gamma: float) -> np.ndarray:
    """Vehicle position minus its moving target's position."""
    return np.asarray(p, dtype=float) - position(traj, gamma)


def saturate_speed(v, v_min: float, v_max: float) -> np.ndarray:
    """Scale a velocity to respect the speed band, preserving direction.

    An exactly zero command stays zero: the floor only applies when moving.
    """
    v = np.asarray(v, dtype=float)
    speed = float(np.linalg.norm(v))
    if speed > v_max:
        return v * (v_max / speed)
    if 0.0 < speed < v_min:
        return v * (v_min / speed)
    return v


def disturbance_velocity(state: VehicleState, t: float) -> np.ndarray:
    out = np.zeros(3)
    for w in state.disturbances:
        if w.active(t):
            out += np.asarray(w.velocity)
    return out


def pf_step(
    state: VehicleState,
    traj: BezierTrajectory,
    gamma: float,
    gamma_dot: float,
    cfg: PFConfig,
    dt: float,
    t: float = 0.0,
) -> VehicleState:
    """One explicit-Euler step of the path-following law.

    Command = target feedforward - k_p * path error + active disturbance,
    saturated into the speed band.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    e = pf_error(state.p, traj, gamma)
    cmd = virtual_target_velocity(traj, gamma, gamma_dot) - cfg.k_p * e + disturbance_velocity(state, t)
    cmd = saturate_speed(cmd, cfg.v_min, cfg.v_max)
    p_new = tuple(pc + dt * vc for pc, vc in zip(state.p, cmd))
    return replace(state, p=p_new)


def inject_disturbance(state: VehicleState, window, velocity) -> VehicleState:
    """Attach a windowed velocity disturbance; overlapping windows are rejected."""
    t_a, t_b = float(window[0]), float(window[1])
    new = DisturbanceWindow(t_a, t_b, tuple(velocity))
    for w in state.disturbances:
        if new.t_start < w.t_end and w.t_start < new.t_end:
            raise ValueError(
                f"disturbance window [{t_a}, {t_b}) overlaps existing [{w.t_start}, {w.t_end})"
            )
    return replace(state, disturbances=state.disturbances + (new,))
