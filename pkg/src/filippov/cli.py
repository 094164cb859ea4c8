"""Command-line driver: scenario ingestion, dispatch, report emission.

Every command reads a scenario file, runs the corresponding library
operation, and writes ``<name>.<command>.json`` (plus CSV/SVG side files
where applicable) into the scenario's output directory.  Exit codes:
0 ok, 1 input error, 2 numerical failure, 3 verification mismatch.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .cycles import cycle_census, find_cycles_local, pseudo_hopf_scan
from .errors import (
    FilippovError,
    InputError,
    NumericalError,
    VerificationMismatch,
)
from .field import classify_mts
from .flow import estimate_lyapunov, sample_displacement, write_delta_csv
from .portrait import render_portrait
from .scenario import (
    Scenario,
    load_scenario,
    scenario_to_dict,
    with_overrides,
)
from .unfold import (
    apply_shift,
    build_perturbation,
    build_unfolded,
    lemma1_check,
    local_V2_limit_check,
    verify_contact_ladder,
)

COMMANDS = ("classify", "lyapunov", "unfold", "verify-ladder", "verify-lemma1",
            "verify-v2-limit", "cycles", "scan", "delta-dump", "portrait")

LEMMA1_GATE = 1e-8


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, float):
        return float(obj)
    return obj


def _unfolded_shifted(scenario: Scenario):
    if scenario.unfold is None:
        raise InputError("this command needs an 'unfold' block in the scenario")
    params = scenario.unfold
    Z = scenario.field
    if params.k >= 2:
        polys = build_perturbation(Z, params)
        Zu = build_unfolded(Z, polys)
    else:
        polys = None
        Zu = Z
    Zb = apply_shift(Zu, params.b, params.shift_convention)
    return params, polys, Zu, Zb


def _delta_grid(scenario: Scenario, n: int):
    w = scenario.window
    return scenario.window.center + np.geomspace(
        w.radius / 300.0, w.radius, n)


def _cmd_classify(scenario, args):
    data = classify_mts(scenario.field)
    return data.to_json_dict(), "ok", []


def _cmd_lyapunov(scenario, args):
    w = scenario.window
    est = estimate_lyapunov(
        scenario.field, (w.radius / 300.0, w.radius), scenario.integrator)
    return est.to_json_dict(), "ok", []


def _cmd_unfold(scenario, args):
    if scenario.unfold is None:
        raise InputError("this command needs an 'unfold' block in the scenario")
    polys = build_perturbation(scenario.field, scenario.unfold)
    Zu = build_unfolded(scenario.field, polys)
    payload = polys.to_json_dict()
    payload["unfolded"] = {
        "upper": {"X": Zu.upper.X.to_triples(), "Y": Zu.upper.Y.to_triples()},
        "lower": {"X": Zu.lower.X.to_triples(), "Y": Zu.lower.Y.to_triples()},
    }
    return payload, "ok", []


def _cmd_verify_ladder(scenario, args):
    params, _, Zu, _ = _unfolded_shifted(scenario)
    report = verify_contact_ladder(Zu, params)
    return report.to_json_dict(), "ok", []


def _cmd_verify_lemma1(scenario, args):
    if scenario.unfold is None:
        raise InputError("this command needs an 'unfold' block in the scenario")
    k = scenario.unfold.k
    gate = args.gate
    if args.draws > 0:
        rng = np.random.default_rng(args.seed)
        worst = 0.0
        runs = []
        for _ in range(args.draws):
            lam = _random_lambda(rng, k)
            rep = lemma1_check(scenario.field, k, lam)
            worst = max(worst, rep.max_residual())
            runs.append({"lambda": [float(a) for a in lam],
                         "max_residual": rep.max_residual()})
        payload = {"draws": args.draws, "seed": args.seed, "gate": gate,
                   "max_residual": worst, "runs": runs}
        ok = worst < gate
    else:
        rep = lemma1_check(scenario.field, k, list(scenario.unfold.lam))
        payload = rep.to_json_dict()
        payload["gate"] = gate
        ok = rep.max_residual() < gate
    if not ok:
        raise VerificationMismatch(
            f"identity residual exceeds the gate {gate:g}",
            report=payload)
    return payload, "ok", []


def _random_lambda(rng, k: int, span: float = 3.0, min_gap: float = 0.2):
    n = 2 * k - 2
    while True:
        lam = rng.uniform(-span, span, size=n)
        ok = all(abs(a) >= min_gap for a in lam)
        ok = ok and all(abs(lam[i] - lam[j]) >= min_gap
                        for i in range(n) for j in range(i + 1, n))
        if ok:
            return [float(a) for a in lam]


def _cmd_verify_v2_limit(scenario, args):
    if scenario.unfold is None:
        raise InputError("this command needs an 'unfold' block in the scenario")
    report = local_V2_limit_check(scenario.field, scenario.unfold)
    return report.to_json_dict(), "ok", []


def _cmd_cycles(scenario, args):
    if scenario.unfold is None:
        raise InputError("this command needs an 'unfold' block in the scenario")
    report = cycle_census(scenario.field, scenario.unfold, scenario.integrator,
                          u_radius=scenario.window.radius)
    status = "ok" if report.passed else "mismatch"
    return report.to_json_dict(), status, list(report.diagnostics)


def _cmd_scan(scenario, args):
    if args.b_values:
        b_values = args.b_values
    elif scenario.unfold is not None and scenario.unfold.b != 0:
        mag = abs(scenario.unfold.b)
        b_values = [-mag, mag]
    else:
        b_values = [-1e-4, 1e-4]
    convention = (scenario.unfold.shift_convention
                  if scenario.unfold is not None else "minus")
    table = pseudo_hopf_scan(scenario.field, b_values, convention,
                             scenario.integrator,
                             window_radius=scenario.window.radius)
    csv = _out_dir(scenario) / f"{scenario.name}.scan.csv"
    table.write_csv(csv)
    payload = table.to_json_dict()
    payload["csv"] = str(csv)
    return payload, "ok", []


def _cmd_delta_dump(scenario, args):
    xs = _delta_grid(scenario, 33)
    samples = sample_displacement(scenario.field, xs, scenario.integrator,
                                  base_x=scenario.window.center)
    csv = _out_dir(scenario) / f"{scenario.name}.delta.csv"
    write_delta_csv(samples, csv)
    payload = {"n_samples": len(samples),
               "x": [s.x for s in samples],
               "delta": [s.delta_value for s in samples],
               "csv": str(csv)}
    return payload, "ok", []


def _cmd_portrait(scenario, args):
    Z = scenario.field
    cycles = []
    if scenario.unfold is not None:
        params, _, _, Zb = _unfolded_shifted(scenario)
        Z = Zb
        if params.b != 0:
            diags: list = []
            cycles = find_cycles_local(
                Z, scenario.window.center, scenario.window.radius,
                params.b, scenario.integrator, diags)
    out_dir = _out_dir(scenario)
    svg = out_dir / f"{scenario.name}.portrait.svg"
    csv = out_dir / f"{scenario.name}.portrait.csv"
    summary = render_portrait(
        Z, scenario.window.center, scenario.window.radius,
        scenario.integrator, cycles=cycles, svg_path=svg, csv_path=csv)
    summary["svg"] = str(svg)
    summary["csv"] = str(csv)
    return summary, "ok", []


def _out_dir(scenario: Scenario) -> Path:
    out = Path(scenario.outputs)
    out.mkdir(parents=True, exist_ok=True)
    return out


_DISPATCH = {
    "classify": _cmd_classify,
    "lyapunov": _cmd_lyapunov,
    "unfold": _cmd_unfold,
    "verify-ladder": _cmd_verify_ladder,
    "verify-lemma1": _cmd_verify_lemma1,
    "verify-v2-limit": _cmd_verify_v2_limit,
    "cycles": _cmd_cycles,
    "scan": _cmd_scan,
    "delta-dump": _cmd_delta_dump,
    "portrait": _cmd_portrait,
}


def _write_report(scenario: Scenario, command: str, payload, status,
                  diagnostics) -> Path:
    out_dir = Path(scenario.outputs)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = {
        "scenario": scenario.name,
        "command": command,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "tool_version": __version__,
        "status": status,
        "diagnostics": list(diagnostics),
        "payload": _jsonable(payload),
    }
    path = out_dir / f"{scenario.name}.{command}.json"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def run(config_path, command: str, b=None, epsilon=None, shift=None,
        out=None, seed: int = 0, gate: float = LEMMA1_GATE, draws: int = 0,
        b_values=None, dump_normalized: bool = False):
    """Programmatic entry point; returns ``(exit_code, report_dict)``."""
    if command not in COMMANDS:
        raise InputError(f"unknown command {command!r}")
    scenario = load_scenario(config_path)
    scenario = with_overrides(scenario, b=b, epsilon=epsilon, shift=shift,
                              out=out)

    if dump_normalized:
        out_dir = Path(scenario.outputs)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / f"{scenario.name}.normalized.json"
        doc = _jsonable(scenario_to_dict(scenario))
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return 0, doc

    args = argparse.Namespace(seed=seed, gate=gate, draws=draws,
                              b_values=b_values)
    handler = _DISPATCH[command]
    try:
        payload, status, diagnostics = handler(scenario, args)
        code = 0 if status == "ok" else 3
    except VerificationMismatch as exc:
        payload = exc.report.to_json_dict() if hasattr(exc.report, "to_json_dict") \
            else (exc.report or {})
        status, diagnostics, code = "mismatch", [str(exc)], 3
    except InputError as exc:
        payload, status, diagnostics, code = {}, "error", [str(exc)], 1
    except NumericalError as exc:
        payload, status, diagnostics, code = {}, "error", [str(exc)], 2

    report_path = _write_report(scenario, command, payload, status, diagnostics)
    with open(report_path, "r", encoding="utf-8") as fh:
        report = json.load(fh)
    return code, report


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="filippov",
        description="Classify tangential singularities of piecewise-smooth "
                    "planar fields and hunt the limit cycles born from "
                    "splitting them.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="scenario JSON file")
    parser.add_argument("--b", type=float, default=None,
                        help="override the shift parameter")
    parser.add_argument("--epsilon", type=float, default=None,
                        help="override the unfolding scale")
    parser.add_argument("--shift", choices=("minus", "plus"), default=None,
                        help="override the shift convention")
    parser.add_argument("--out", default=None, help="override the output dir")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for randomized verification sweeps")
    parser.add_argument("--draws", type=int, default=0,
                        help="verify-lemma1: number of random node draws")
    parser.add_argument("--gate", type=float, default=LEMMA1_GATE,
                        help="verify-lemma1: residual gate")
    parser.add_argument("--b-values", default=None,
                        help="scan: comma-separated shift values "
                             "(for example '-1e-4,1e-4')")
    parser.add_argument("--dump-normalized", action="store_true",
                        help="write the normalized scenario and exit")
    args = parser.parse_args(argv)

    b_values = None
    if args.b_values is not None:
        try:
            b_values = [float(v) for v in args.b_values.split(",") if v.strip()]
        except ValueError:
            print(f"error: malformed --b-values {args.b_values!r}",
                  file=sys.stderr)
            return 1

    try:
        code, report = run(
            args.config, args.command, b=args.b, epsilon=args.epsilon,
            shift=args.shift, out=args.out, seed=args.seed, gate=args.gate,
            draws=args.draws, b_values=b_values,
            dump_normalized=args.dump_normalized)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except VerificationMismatch as exc:
        print(f"mismatch: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except FilippovError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if not args.dump_normalized:
        for line in report.get("diagnostics", []):
            print(line, file=sys.stderr)
        print(f"{report['scenario']}.{report['command']}: {report['status']}")
    return code


if __name__ == "__main__":
    sys.exit(main())
