"""Command-line front end.

Verbs:
  validate  check a scenario file, print diagnostics
  run       simulate and write timeseries.csv, events.jsonl, summary.json
  certify   print the analytic constants for a scenario as JSON
  sweep     grid over one override key, one summary per point

Exit codes: 0 ok, 2 validation error, 3 contract violation, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import engine, scenario_io
from .etc import event_log_lines

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CONTRACT = 3
EXIT_IO = 4


def _load(args):
    """Load + validate the scenario named by CLI args; exits on failure."""
    overrides = list(args.set or [])
    if getattr(args, "dt", None) is not None:
        overrides.append(f"sim.dt={args.dt!r}")
    try:
        doc = scenario_io.load_document(args.scenario)
    except OSError as exc:
        print(f"error: cannot read scenario: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_IO)
    except json.JSONDecodeError as exc:
        print(f"error: {args.scenario}: malformed JSON: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)
    try:
        doc = scenario_io.apply_overrides(doc, overrides)
    except (ValueError, KeyError, IndexError) as exc:
        print(f"error: bad override: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)
    scenario, diags = scenario_io.parse_scenario(doc)
    for d in diags:
        print(str(d), file=sys.stderr)
    if scenario is None:
        raise SystemExit(EXIT_VALIDATION)
    return scenario, diags


def _float_csv(values):
    # plain-float repr: shortest round-trip text, no numpy scalar wrappers
    return ",".join(repr(float(v)) for v in values)


def write_timeseries(path, result):
    """One row per step: t, per-agent column groups, then fleet metrics.

    Floats are written with repr (shortest round-trip), so identical runs
    produce byte-identical files.
    """
    n = result.n
    cols = ["t"]
    for i in range(1, n + 1):
        cols += [
            f"gamma_{i}",
            f"gamma_dot_{i}",
            f"alpha_{i}",
            f"accel_{i}",
            f"p_x_{i}",
            f"p_y_{i}",
            f"p_z_{i}",
            f"e_pf_norm_{i}",
        ]
    cols += ["xi_norm", "max_gamma_gap"]
    with open(path, "w", encoding="utf-8") as fp:
        fp.write(",".join(cols) + "\n")
        for r in range(len(result.t)):
            row = [result.t[r]]
            for i in range(n):
                row += [
                    result.gamma[r, i],
                    result.gamma_dot[r, i],
                    result.alpha[r, i],
                    result.accel[r, i],
                    result.pos[r, i, 0],
                    result.pos[r, i, 1],
                    result.pos[r, i, 2],
                    result.e_pf_norm[r, i],
                ]
            row += [result.xi_norm[r], result.max_gap[r]]
            fp.write(_float_csv(row) + "\n")


def write_events(path, events):
    with open(path, "w", encoding="utf-8") as fp:
        for line in event_log_lines(events):
            fp.write(line + "\n")


def write_summary(path, summary):
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(summary, fp, indent=2, sort_keys=True)
        fp.write("\n")


def _emit_artifacts(out_dir, result, error=None):
    try:
        os.makedirs(out_dir, exist_ok=True)
        write_timeseries(os.path.join(out_dir, "timeseries.csv"), result)
        write_events(os.path.join(out_dir, "events.jsonl"), result.events)
        summary = engine.summarize(result)
        if error:
            summary["error"] = error
        write_summary(os.path.join(out_dir, "summary.json"), summary)
    except OSError as exc:
        print(f"error: writing artifacts: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_IO)
    return summary


def cmd_validate(args) -> int:
    scenario, diags = _load(args)
    print(f"ok: {args.scenario}: {scenario.n} agents, t_f={scenario.t_f} s, "
          f"{len(scenario_io.warnings(diags))} warning(s)")
    return EXIT_OK


def cmd_run(args) -> int:
    scenario, _ = _load(args)
    if args.seed is not None:
        print(f"note: --seed {args.seed} recorded but unused; runs are deterministic", file=sys.stderr)
    try:
        result = engine.run(scenario, kernel=args.kernel)
    except engine.SimulationAbort as exc:
        _emit_artifacts(args.out, exc.result, error=str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    summary = _emit_artifacts(args.out, result)
    print(
        f"run complete: status={summary['status']} rows={summary['rows']} "
        f"events={summary['events_total']} -> {args.out}"
    )
    return EXIT_OK


def cmd_certify(args) -> int:
    scenario, _ = _load(args)
    try:
        c = engine.certify(scenario)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    record = {
        "n_agents": c.n,
        "weight": c.cert.weight.tolist(),
        "solution": c.cert.solution.tolist(),
        "lyapunov_residual": c.cert.residual_norm,
        "solution_min_eig": c.cert.solution_min_eig,
        "solution_max_eig": c.cert.solution_max_eig,
        "lambda_tc": c.lambda_tc,
        "overshoot_gain": c.overshoot,
        "forcing_gain_policy": c.forcing_gain,
        "xi0_norm": c.err0_norm,
        "drive_bound": c.drive_bound,
        "error_matrix_norm": c.state_matrix_norm,
        "min_event_gap_bound": c.min_event_gap_bound,
        "note": "drive bound uses the forcing-gain policy (default 0): a lower-envelope estimate",
    }
    json.dump(record, sys.stdout, indent=2, sort_keys=True)
    print()
    return EXIT_OK


def cmd_sweep(args) -> int:
    values = args.values.split(",")
    index = {"key": args.key, "points": []}
    for raw in values:
        scenario, _ = _load_with_extra(args, f"{args.key}={raw}")
        point_dir = os.path.join(args.out, f"{args.key}={raw}")
        try:
            result = engine.run(scenario, kernel=args.kernel)
        except engine.SimulationAbort as exc:
            result = exc.result
        try:
            os.makedirs(point_dir, exist_ok=True)
            summary = engine.summarize(result)
            write_summary(os.path.join(point_dir, "summary.json"), summary)
        except OSError as exc:
            print(f"error: writing artifacts: {exc}", file=sys.stderr)
            return EXIT_IO
        index["points"].append(
            {"value": raw, "status": summary["status"], "summary": os.path.join(point_dir, "summary.json")}
        )
        print(f"sweep point {args.key}={raw}: status={summary['status']}")
    try:
        os.makedirs(args.out, exist_ok=True)
        write_summary(os.path.join(args.out, "sweep.json"), index)
    except OSError as exc:
        print(f"error: writing artifacts: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _load_with_extra(args, extra):
    merged = argparse.Namespace(
        scenario=args.scenario,
        set=list(args.set or []) + [extra],
        dt=getattr(args, "dt", None),
    )
    return _load(merged)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="etcoord", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out=False):
        sp.add_argument("--scenario", required=True, help="path to a scenario JSON file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a scenario field (repeatable), e.g. gains.a=7.5")
        sp.add_argument("--dt", type=float, default=None, help="shortcut for --set sim.dt=...")
        if out:
            sp.add_argument("--out", required=True, help="output directory")
            sp.add_argument("--seed", type=int, default=None,
                            help="reserved; bundled scenarios are deterministic")
            sp.add_argument("--kernel", choices=("auto", "fast", "pure"), default="auto")

    common(sub.add_parser("validate", help="check a scenario file"))
    common(sub.add_parser("run", help="simulate and write artifacts"), out=True)
    common(sub.add_parser("certify", help="print analytic constants"))
    sp = sub.add_parser("sweep", help="run a grid over one override key")
    common(sp, out=True)
    sp.add_argument("--key", required=True, help="scenario field to sweep, e.g. gains.a")
    sp.add_argument("--values", required=True, help="comma-separated values")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "validate": cmd_validate,
        "run": cmd_run,
        "certify": cmd_certify,
        "sweep": cmd_sweep,
    }
    try:
        return handlers[args.command](args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
