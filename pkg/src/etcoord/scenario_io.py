"""Scenario documents: parsing, validation diagnostics, canonical output.

A scenario file is a JSON document with sections: agents, graph,
trajectories, gains, threshold, gamma_dot_d, vehicle, sim, analysis and
disturbances.  ``parse_scenario`` turns a document into an engine Scenario,
collecting diagnostics (field path + message) instead of raising, so the CLI
can report every problem at once.  ``scenario_to_dict`` emits the canonical
form; parse -> serialize -> parse is value-identical for any valid document.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from typing import Optional

from .algebra import GainSet
from .bezier import BezierTrajectory, TrajectorySet, min_pairwise_separation
from .engine import AgentDisturbance, Scenario, certify
from .etc import PaceProfile, ThresholdFunction
from .graphs import Digraph, has_spanning_tree
from .vehicle import PFConfig

SECTIONS = (
    "agents",
    "graph",
    "trajectories",
    "gains",
    "threshold",
    "gamma_dot_d",
    "vehicle",
    "sim",
)


@dataclass(frozen=True)
class Diagnostic:
    severity: str   # "error" or "warning"
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.path}: {self.message}"


def errors(diags) -> list:
    return [d for d in diags if d.severity == "error"]


def warnings(diags) -> list:
    return [d for d in diags if d.severity == "warning"]


class _Checker:
    def __init__(self):
        self.diags = []

    def error(self, path, message):
        self.diags.append(Diagnostic("error", path, message))

    def warning(self, path, message):
        self.diags.append(Diagnostic("warning", path, message))

    def number(self, obj, path, *, positive=False, nonneg=False) -> Optional[float]:
        if not isinstance(obj, (int, float)) or isinstance(obj, bool):
            self.error(path, f"expected a number, got {obj!r}")
            return None
        v = float(obj)
        if positive and not v > 0:
            self.error(path, f"must be positive, got {v}")
            return None
        if nonneg and v < 0:
            self.error(path, f"must be nonnegative, got {v}")
            return None
        return v

    def vector3(self, obj, path) -> Optional[tuple]:
        if not isinstance(obj, (list, tuple)) or len(obj) != 3:
            self.error(path, f"expected [x, y, z], got {obj!r}")
            return None
        out = []
        for c, comp in zip(obj, "xyz"):
            v = self.number(c, f"{path}.{comp}")
            if v is None:
                return None
            out.append(v)
        return tuple(out)


def parse_scenario(doc: dict):
    """Build a Scenario from a document.

    Returns (scenario_or_None, diagnostics).  The scenario is None whenever
    any error-severity diagnostic was produced.
    """
    ck = _Checker()
    if not isinstance(doc, dict):
        ck.error("$", "scenario document must be a JSON object")
        return None, ck.diags
    for sec in SECTIONS:
        if sec not in doc:
            ck.error(sec, "missing required section")
    if errors(ck.diags):
        return None, ck.diags

    name = doc.get("name", "")
    if not isinstance(name, str):
        ck.error("name", "must be a string")
        name = ""

    # agents ---------------------------------------------------------------
    agents = doc["agents"]
    n = 0
    if not isinstance(agents, list) or len(agents) < 2:
        ck.error("agents", "need a list of at least 2 agents")
    else:
        n = len(agents)
        ids = []
        for z, a in enumerate(agents):
            if not isinstance(a, dict) or "id" not in a:
                ck.error(f"agents[{z}]", "each agent needs an object with an 'id'")
                continue
            ids.append(a["id"])
        if sorted(ids) != list(range(1, n + 1)):
            ck.error("agents", f"agent ids must be exactly 1..{n}, got {sorted(ids)}")

    # graph ------------------------------------------------------------------
    digraph = None
    gsec = doc["graph"]
    if not isinstance(gsec, dict) or not isinstance(gsec.get("edges"), list):
        ck.error("graph.edges", "expected a list of [i, j] pairs")
    elif n >= 2:
        try:
            digraph = Digraph.from_edges(n, gsec["edges"])
        except (ValueError, TypeError) as exc:
            ck.error("graph.edges", str(exc))

    # trajectories -------------------------------------------------------------
    trajset = None
    tsec = doc["trajectories"]
    t_f = None
    if not isinstance(tsec, dict):
        ck.error("trajectories", "expected an object with t_f and control_points")
    else:
        t_f = ck.number(tsec.get("t_f"), "trajectories.t_f", positive=True)
        cps = tsec.get("control_points")
        if not isinstance(cps, list) or (n and len(cps) != n):
            ck.error("trajectories.control_points", f"need one control-point list per agent ({n})")
        elif t_f is not None:
            trajs = []
            for z, pts in enumerate(cps):
                path = f"trajectories.control_points[{z}]"
                if not isinstance(pts, list) or len(pts) < 2:
                    ck.error(path, "need at least 2 control points")
                    continue
                vecs = [ck.vector3(p, f"{path}[{w}]") for w, p in enumerate(pts)]
                if any(v is None for v in vecs):
                    continue
                try:
                    trajs.append(BezierTrajectory(tuple(vecs), t_f))
                except ValueError as exc:
                    ck.error(path, str(exc))
            if len(trajs) == n:
                trajset = TrajectorySet(tuple(trajs))
    min_sep = 10.0
    if isinstance(tsec, dict) and "min_separation" in tsec:
        v = ck.number(tsec["min_separation"], "trajectories.min_separation", nonneg=True)
        if v is not None:
            min_sep = v

    # gains ---------------------------------------------------------------------
    gains = None
    gn = doc["gains"]
    if not isinstance(gn, dict):
        ck.error("gains", "expected an object with a, b, k_pf, eta")
    else:
        vals = {k: ck.number(gn.get(k), f"gains.{k}", positive=True) for k in ("a", "b", "k_pf", "eta")}
        if all(v is not None for v in vals.values()):
            gains = GainSet(**vals)

    # threshold ---------------------------------------------------------------
    threshold = None
    th = doc["threshold"]
    if not isinstance(th, dict):
        ck.error("threshold", "expected an object with c1, c2, c3")
    else:
        c1 = th.get("c1")
        if not isinstance(c1, (int, float)) or isinstance(c1, bool) or not c1 > 0:
            ck.error("threshold.c1", "threshold floor must be positive")
            c1 = None
        c2 = ck.number(th.get("c2", 0.0), "threshold.c2", nonneg=True)
        c3 = ck.number(th.get("c3", 0.0), "threshold.c3", nonneg=True)
        if None not in (c1, c2, c3):
            threshold = ThresholdFunction(float(c1), c2, c3)

    # desired pace ----------------------------------------------------------------
    pace = None
    pp = doc["gamma_dot_d"]
    if not isinstance(pp, dict) or not isinstance(pp.get("breakpoints"), list) or not pp["breakpoints"]:
        ck.error("gamma_dot_d.breakpoints", "expected a nonempty list of [t, value] pairs")
    else:
        ok = True
        pairs = []
        for z, bp in enumerate(pp["breakpoints"]):
            if not isinstance(bp, (list, tuple)) or len(bp) != 2:
                ck.error(f"gamma_dot_d.breakpoints[{z}]", f"expected [t, value], got {bp!r}")
                ok = False
                continue
            tval = ck.number(bp[0], f"gamma_dot_d.breakpoints[{z}].t", nonneg=True)
            vval = ck.number(bp[1], f"gamma_dot_d.breakpoints[{z}].value", positive=True)
            if tval is None or vval is None:
                ok = False
            else:
                pairs.append((tval, vval))
        if ok:
            try:
                pace = PaceProfile.from_breakpoints(pairs)
            except ValueError as exc:
                ck.error("gamma_dot_d.breakpoints", str(exc))

    # vehicle ------------------------------------------------------------------
    pf = None
    vh = doc["vehicle"]
    if not isinstance(vh, dict):
        ck.error("vehicle", "expected an object with k_p, v_min, v_max, rho")
    else:
        k_p = ck.number(vh.get("k_p"), "vehicle.k_p", positive=True)
        v_min = ck.number(vh.get("v_min", 0.0), "vehicle.v_min", nonneg=True)
        v_max = ck.number(vh.get("v_max"), "vehicle.v_max", positive=True)
        rho = ck.number(vh.get("rho"), "vehicle.rho", positive=True)
        if None not in (k_p, v_min, v_max, rho):
            if v_max <= v_min:
                ck.error("vehicle.v_max", f"v_max={v_max} must exceed v_min={v_min}")
            else:
                pf = PFConfig(k_p=k_p, v_min=v_min, v_max=v_max, rho=rho)

    # sim ---------------------------------------------------------------------
    sm = doc["sim"]
    dt = t_end = None
    if not isinstance(sm, dict):
        ck.error("sim", "expected an object with dt and t_end")
    else:
        dt = ck.number(sm.get("dt"), "sim.dt", positive=True)
        t_end = ck.number(sm.get("t_end"), "sim.t_end", positive=True)

    # analysis ------------------------------------------------------------------
    an = doc.get("analysis", {})
    beta = 1.0
    forcing_gain = 0.0
    if not isinstance(an, dict):
        ck.error("analysis", "expected an object")
    else:
        if "beta" in an:
            v = ck.number(an["beta"], "analysis.beta", positive=True)
            beta = v if v is not None else beta
        if "forcing_gain" in an:
            v = ck.number(an["forcing_gain"], "analysis.forcing_gain", nonneg=True)
            forcing_gain = v if v is not None else forcing_gain

    # per-agent initial state ----------------------------------------------------
    gamma0 = []
    gamma_dot0 = []
    positions0 = []
    if n and trajset is not None and pace is not None and isinstance(agents, list):
        by_id = {a.get("id"): a for a in agents if isinstance(a, dict)}
        for i in range(1, n + 1):
            a = by_id.get(i, {})
            path = f"agents[id={i}]"
            g0 = ck.number(a.get("gamma0", 0.0), f"{path}.gamma0")
            gd0 = ck.number(a.get("gamma_dot0", pace.value(0.0)), f"{path}.gamma_dot0", nonneg=True)
            if g0 is not None and t_f is not None and not (0.0 <= g0 <= t_f):
                ck.error(f"{path}.gamma0", f"must lie in [0, {t_f}]")
                g0 = None
            if "position" in a:
                pos = ck.vector3(a["position"], f"{path}.position")
            else:
                off = ck.vector3(a.get("offset", [0.0, 0.0, 0.0]), f"{path}.offset")
                start = trajset[i - 1].control_points[0]
                pos = None if off is None else tuple(sc + oc for sc, oc in zip(start, off))
            if None in (g0, gd0) or pos is None:
                continue
            gamma0.append(g0)
            gamma_dot0.append(gd0)
            positions0.append(pos)

    # disturbances -----------------------------------------------------------------
    disturbances = []
    ds = doc.get("disturbances", [])
    if not isinstance(ds, list):
        ck.error("disturbances", "expected a list")
    else:
        for z, d in enumerate(ds):
            path = f"disturbances[{z}]"
            if not isinstance(d, dict):
                ck.error(path, "expected an object")
                continue
            agent = d.get("agent")
            if not isinstance(agent, int) or not (1 <= agent <= n):
                ck.error(f"{path}.agent", f"unknown agent {agent!r}")
                continue
            win = d.get("window")
            if not isinstance(win, (list, tuple)) or len(win) != 2:
                ck.error(f"{path}.window", "expected [t_start, t_end]")
                continue
            t_a = ck.number(win[0], f"{path}.window[0]", nonneg=True)
            t_b = ck.number(win[1], f"{path}.window[1]", positive=True)
            vel = ck.vector3(d.get("velocity"), f"{path}.velocity")
            if None in (t_a, t_b) or vel is None:
                continue
            if t_a >= t_b:
                ck.error(f"{path}.window", f"window [{t_a}, {t_b}) is empty or inverted")
                continue
            disturbances.append(AgentDisturbance(agent=agent, window=(t_a, t_b), velocity=vel))
        for z1, d1 in enumerate(disturbances):
            for d2 in disturbances[z1 + 1 :]:
                if d1.agent == d2.agent and d1.window[0] < d2.window[1] and d2.window[0] < d1.window[1]:
                    ck.error(
                        "disturbances",
                        f"agent {d1.agent} has overlapping windows {d1.window} and {d2.window}",
                    )

    # semantic checks needing the assembled pieces ------------------------------------
    if digraph is not None and not has_spanning_tree(digraph):
        ck.error("graph.edges", "no directed spanning tree: some agent is unreachable from every root")

    if errors(ck.diags):
        return None, ck.diags

    scenario = Scenario(
        digraph=digraph,
        trajectories=trajset,
        gains=gains,
        threshold=threshold,
        pace=pace,
        pf=pf,
        gamma0=tuple(gamma0),
        gamma_dot0=tuple(gamma_dot0),
        positions0=tuple(positions0),
        disturbances=tuple(disturbances),
        dt=dt,
        t_end=t_end,
        name=name,
        beta=beta,
        forcing_gain=forcing_gain,
        min_separation=min_sep,
    )

    # advisory warnings ------------------------------------------------------------
    band = pf.v_max - pf.v_min
    if gains.eta <= band:
        ck.warning(
            "gains.eta",
            f"eta={gains.eta} does not exceed v_max - v_min={band}; the path-error "
            "coupling bound behind the convergence rate may not hold",
        )
    sep = min_pairwise_separation(trajset)
    if sep < scenario.min_separation:
        ck.warning(
            "trajectories",
            f"smallest virtual-target separation {sep:.2f} m is below the required "
            f"{scenario.min_separation:.2f} m",
        )
    try:
        constants = certify(scenario)
        if dt > constants.min_event_gap_bound:
            ck.warning(
                "sim.dt",
                f"dt={dt} exceeds the analytic inter-event floor "
                f"{constants.min_event_gap_bound:.3e} s; event timing will be coarse",
            )
    except ValueError as exc:
        ck.error("graph.edges", str(exc))
        return None, ck.diags

    return scenario, ck.diags


def scenario_to_dict(scn: Scenario) -> dict:
    """Canonical document for a Scenario; floats round-trip exactly via JSON."""
    return {
        "name": scn.name,
        "agents": [
            {
                "id": i + 1,
                "position": list(scn.positions0[i]),
                "gamma0": scn.gamma0[i],
                "gamma_dot0": scn.gamma_dot0[i],
            }
            for i in range(scn.n)
        ],
        "graph": {"edges": sorted([i, j] for (i, j) in scn.digraph.edges)},
        "trajectories": {
            "t_f": scn.t_f,
            "min_separation": scn.min_separation,
            "control_points": [
                [list(p) for p in tr.control_points] for tr in scn.trajectories.trajectories
            ],
        },
        "gains": {
            "a": scn.gains.a,
            "b": scn.gains.b,
            "k_pf": scn.gains.k_pf,
            "eta": scn.gains.eta,
        },
        "threshold": {"c1": scn.threshold.c1, "c2": scn.threshold.c2, "c3": scn.threshold.c3},
        "gamma_dot_d": {"breakpoints": [[t, v] for t, v in zip(scn.pace.times, scn.pace.values)]},
        "vehicle": {
            "k_p": scn.pf.k_p,
            "v_min": scn.pf.v_min,
            "v_max": scn.pf.v_max,
            "rho": scn.pf.rho,
        },
        "sim": {"dt": scn.dt, "t_end": scn.t_end},
        "analysis": {"beta": scn.beta, "forcing_gain": scn.forcing_gain},
        "disturbances": [
            {"agent": d.agent, "window": list(d.window), "velocity": list(d.velocity)}
            for d in scn.disturbances
        ],
    }


def load_document(path) -> dict:
    with open(path, "r", encoding="utf-8") as fp:
        return json.load(fp)


def load_scenario(path, overrides=()):
    """Read, override and parse a scenario file; returns (scenario, diagnostics)."""
    doc = load_document(path)
    if overrides:
        doc = apply_overrides(doc, overrides)
    return parse_scenario(doc)


def apply_overrides(doc: dict, assignments) -> dict:
    """Apply 'dotted.path=value' assignments to a copy of the document.

    Values are parsed as JSON when possible, else kept as strings.  Integer
    path segments index into lists.
    """
    out = copy.deepcopy(doc)
    for item in assignments:
        if "=" not in item:
            raise ValueError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        parts = key.split(".")
        node = out
        for part in parts[:-1]:
            if isinstance(node, list):
                node = node[int(part)]
            elif isinstance(node, dict):
                node = node.setdefault(part, {})
            else:
                raise ValueError(f"cannot descend into {part!r} of override {item!r}")
        last = parts[-1]
        if isinstance(node, list):
            node[int(last)] = value
        elif isinstance(node, dict):
            node[last] = value
        else:
            raise ValueError(f"cannot assign {last!r} in override {item!r}")
    return out
