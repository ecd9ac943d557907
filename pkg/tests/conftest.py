"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

import time
from pathlib import Path

import numpy as np
import pytest

from etcoord import (
    BezierTrajectory,
    Digraph,
    GainSet,
    PaceProfile,
    PFConfig,
    Scenario,
    ThresholdFunction,
    TrajectorySet,
    position,
)
from etcoord import engine, scenario_io

BUNDLED_SCENARIO = (
    Path(__file__).resolve().parent.parent
    / "src"
    / "etcoord"
    / "scenarios"
    / "coordinated_arrival_5uav.json"
)


def random_digraph(rng, n: int, p: float = 0.4) -> Digraph:
    """Uniform random digraph; may or may not contain a spanning tree."""
    edges = [
        (i, j)
        for i in range(1, n + 1)
        for j in range(1, n + 1)
        if i != j and rng.random() < p
    ]
    return Digraph.from_edges(n, edges)


def random_spanning_digraph(rng, n: int, extra: float = 0.25) -> Digraph:
    """Random digraph guaranteed to contain a directed spanning tree.

    A random root transmits to every node through a random tree; extra edges
    are sprinkled on top.
    """
    order = [int(x) + 1 for x in rng.permutation(n)]
    edges = set()
    for idx in range(1, n):
        u = order[idx]
        w = order[int(rng.integers(0, idx))]
        edges.add((u, w))
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i != j and rng.random() < extra:
                edges.add((i, j))
    return Digraph.from_edges(n, edges)


def assert_reduced_spectrum_matches(lap, reduced, tol: float = 1e-6):
    """Assert eig-multiset(reduced) == spectrum(lap) minus one zero.

    spectrum() is exact for integer Laplacians, so it anchors the comparison.
    The reduced matrix inherits any defective eigenvalue of the Laplacian,
    and a QR iteration smears such an eigenvalue of multiplicity m over a
    radius ~eps^(1/m) (up to ~1e-4 here), so the computed values are first
    refined: each is assigned to the nearest exact value, group sizes must
    reproduce the exact multiplicities, and each group collapses to its mean
    (accurate to ~1e-9 where individual values are not).  The refined
    multiset is then greedily matched pairwise within ``tol``.
    """
    from etcoord import spectrum

    full = list(spectrum(lap))
    zero_idx = min(range(len(full)), key=lambda z: abs(full[z]))
    assert abs(full[zero_idx]) <= tol, f"no eigenvalue near zero in {full}"
    full.pop(zero_idx)
    computed = list(np.linalg.eigvals(np.asarray(reduced, dtype=float)))
    assert len(computed) == len(full)

    distinct = []
    for lam in full:
        for d in distinct:
            if abs(lam - d[0]) <= 1e-9:
                d[1] += 1
                break
        else:
            distinct.append([lam, 1])
    groups = [[] for _ in distinct]
    for val in computed:
        j = min(range(len(distinct)), key=lambda z: abs(distinct[z][0] - val))
        groups[j].append(val)
    refined = []
    for (center, mult), grp in zip(distinct, groups):
        assert len(grp) == mult, f"multiplicity mismatch at {center}: {len(grp)} != {mult}"
        mean = sum(grp) / mult
        refined.extend([mean] * mult)

    for lam in full:
        j = min(range(len(refined)), key=lambda z: abs(refined[z] - lam))
        assert abs(refined[j] - lam) <= tol, f"unmatched eigenvalue {lam}"
        refined.pop(j)


def integrate_estimator_reference(b, g0, v0, pace, t_end, dt=1e-6, checkpoints=(1.0,)):
    """Brute-force integration of the estimator ODE; the independent oracle.

    Second-order midpoint steps for the rate and trapezoidal accumulation for
    the estimate, vectorized across draws.  ``pace`` is a list of (t, value)
    breakpoints whose times must be multiples of dt so no step straddles a
    pace switch.  Returns {checkpoint: (g, v)}.
    """
    b = np.asarray(b, dtype=float)
    g = np.array(g0, dtype=float, copy=True)
    v = np.array(v0, dtype=float, copy=True)
    times = [t for t, _ in pace]
    vals = [np.asarray(x, dtype=float) for _, x in pace]  # scalar or per-draw vector
    steps = int(round(t_end / dt))
    cp_steps = {int(round(c / dt)): c for c in checkpoints}
    for c in checkpoints:
        assert abs(c - round(c / dt) * dt) < 1e-12
    out = {}
    seg = 0
    half = 0.5 * dt
    for sidx in range(steps):
        t = sidx * dt
        while seg + 1 < len(times) and times[seg + 1] <= t:
            seg += 1
        c = vals[seg]
        k1 = -b * (v - c)
        vm = v + half * k1
        k2 = -b * (vm - c)
        v_new = v + dt * k2
        g = g + half * (v + v_new)
        v = v_new
        nxt = sidx + 1
        if nxt in cp_steps:
            out[cp_steps[nxt]] = (g.copy(), v.copy())
    return out


def make_scenario(
    n=2,
    edges=((1, 2),),
    *,
    t_f=20.0,
    dt=1e-3,
    t_end=5.0,
    gamma0=None,
    gamma_dot0=None,
    offsets=None,
    pace=((0.0, 1.0),),
    a=3.75,
    b=4.82,
    k_pf=1.5,
    eta=12.0,
    c1=0.03,
    c2=0.0,
    c3=0.0,
    k_p=1.0,
    v_min=0.0,
    v_max=11.9,
    rho=5.0,
    disturbances=(),
    etc_enabled=True,
    name="test",
    y_span=150.0,
):
    """Small programmatic scenario: parallel straight-line tracks, spaced 15 m."""
    trajs = tuple(
        BezierTrajectory(((15.0 * i, 0.0, 10.0), (15.0 * i, y_span, 10.0)), t_f)
        for i in range(n)
    )
    ts = TrajectorySet(trajs)
    pace_p = PaceProfile.from_breakpoints(pace)
    g0 = tuple(gamma0) if gamma0 is not None else (0.0,) * n
    gd0 = tuple(gamma_dot0) if gamma_dot0 is not None else (pace_p.value(0.0),) * n
    offs = offsets if offsets is not None else ((0.0, 0.0, 0.0),) * n
    pos0 = tuple(
        tuple(position(trajs[i], g0[i]) + np.asarray(offs[i], dtype=float))
        for i in range(n)
    )
    return Scenario(
        digraph=Digraph.from_edges(n, edges),
        trajectories=ts,
        gains=GainSet(a=a, b=b, k_pf=k_pf, eta=eta),
        threshold=ThresholdFunction(c1, c2, c3),
        pace=pace_p,
        pf=PFConfig(k_p=k_p, v_min=v_min, v_max=v_max, rho=rho),
        gamma0=g0,
        gamma_dot0=gd0,
        positions0=pos0,
        disturbances=tuple(disturbances),
        dt=dt,
        t_end=t_end,
        name=name,
        etc_enabled=etc_enabled,
    )


@pytest.fixture(scope="session")
def bundled_path():
    return str(BUNDLED_SCENARIO)


@pytest.fixture(scope="session")
def bundled_scenario(bundled_path):
    scenario, diags = scenario_io.load_scenario(bundled_path)
    assert scenario is not None, [str(d) for d in diags]
    return scenario


@pytest.fixture(scope="session")
def bundled_run(bundled_scenario):
    """One shared run of the bundled mission; returns (result, wall_seconds)."""
    t0 = time.perf_counter()
    result = engine.run(bundled_scenario)
    elapsed = time.perf_counter() - t0
    return result, elapsed
