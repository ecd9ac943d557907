"""Desired trajectories as Bezier curves over the virtual-time interval.

A trajectory maps virtual time s in [0, t_f] to a point in 3-space.  The
curve parameter is the normalized s/t_f; velocities returned here are with
respect to virtual time (hodograph scaled by 1/t_f), so the physical speed of
the moving target is velocity(s) * pace.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

# Degree cap shared with the step kernels, which use fixed-size scratch.
MAX_CONTROL_POINTS = 64


def _point_and_slope(cx, cy, cz, degree, u):
    """de Casteljau down to the final segment; returns position and d/du slope.

    The (1-u)*a + u*b lerp form interpolates both endpoints bit-exactly.
    The step kernels replicate this arithmetic; keep the operation order
    unchanged or determinism tests across kernels will fail.
    """
    wx = list(cx)
    wy = list(cy)
    wz = list(cz)
    v = 1.0 - u
    for lvl in range(degree - 1):
        for i in range(degree - lvl):
            wx[i] = v * wx[i] + u * wx[i + 1]
            wy[i] = v * wy[i] + u * wy[i + 1]
            wz[i] = v * wz[i] + u * wz[i + 1]
    px = v * wx[0] + u * wx[1]
    py = v * wy[0] + u * wy[1]
    pz = v * wz[0] + u * wz[1]
    d = float(degree)
    return px, py, pz, d * (wx[1] - wx[0]), d * (wy[1] - wy[0]), d * (wz[1] - wz[0])


@dataclass(frozen=True)
class BezierTrajectory:
    """Control points (>= 2, in meters) and the arrival virtual time t_f > 0."""

    control_points: tuple
    t_f: float

    def __post_init__(self):
        pts = tuple(tuple(float(c) for c in p) for p in self.control_points)
        if len(pts) < 2:
            raise ValueError("a trajectory needs at least 2 control points")
        if len(pts) > MAX_CONTROL_POINTS:
            raise ValueError(f"at most {MAX_CONTROL_POINTS} control points supported")
        for p in pts:
            if len(p) != 3:
                raise ValueError(f"control point {p!r} is not a 3-vector")
        if not (self.t_f > 0):
            raise ValueError(f"t_f must be positive, got {self.t_f!r}")
        object.__setattr__(self, "control_points", pts)
        object.__setattr__(self, "t_f", float(self.t_f))

    @property
    def degree(self) -> int:
        return len(self.control_points) - 1

    def _check_domain(self, s: float):
        if not (0.0 <= s <= self.t_f):
            raise ValueError(f"virtual time {s} outside [0, {self.t_f}]")


def position(traj: BezierTrajectory, s: float) -> np.ndarray:
    """Point on the curve at virtual time s (callers clamp s, we do not)."""
    traj._check_domain(s)
    cx, cy, cz = zip(*traj.control_points)
    px, py, pz, _, _, _ = _point_and_slope(cx, cy, cz, traj.degree, s / traj.t_f)
    return np.array([px, py, pz])


def velocity(traj: BezierTrajectory, s: float) -> np.ndarray:
    """Derivative of position with respect to virtual time, at s."""
    traj._check_domain(s)
    cx, cy, cz = zip(*traj.control_points)
    _, _, _, sx, sy, sz = _point_and_slope(cx, cy, cz, traj.degree, s / traj.t_f)
    return np.array([sx / traj.t_f, sy / traj.t_f, sz / traj.t_f])


def virtual_target_velocity(traj: BezierTrajectory, gamma: float, gamma_dot: float) -> np.ndarray:
    """Physical velocity of the moving target: velocity(gamma) * gamma_dot."""
    return velocity(traj, gamma) * gamma_dot


@dataclass(frozen=True)
class TrajectorySet:
    """One trajectory per agent, all sharing the arrival time t_f."""

    trajectories: tuple

    def __post_init__(self):
        trajs = tuple(self.trajectories)
        if not trajs:
            raise ValueError("empty trajectory set")
        t_f = trajs[0].t_f
        for tr in trajs:
            if tr.t_f != t_f:
                raise ValueError("all trajectories must share the same t_f")
        object.__setattr__(self, "trajectories", trajs)

    def __len__(self) -> int:
        return len(self.trajectories)

    def __getitem__(self, idx: int) -> BezierTrajectory:
        return self.trajectories[idx]

    @property
    def t_f(self) -> float:
        return self.trajectories[0].t_f


def min_pairwise_separation(ts: TrajectorySet, samples: int = 257) -> float:
    """Smallest distance between any two moving targets at matched virtual times.

    Sampled on a uniform grid; a mission-design check, not a proof.
    """
    if len(ts) < 2:
        return float("inf")
    grid = np.linspace(0.0, ts.t_f, samples)
    pts = np.array([[position(tr, s) for s in grid] for tr in ts.trajectories])
    best = float("inf")
    for i, j in combinations(range(len(ts)), 2):
        d = float(np.min(np.linalg.norm(pts[i] - pts[j], axis=1)))
        best = min(best, d)
    return best
