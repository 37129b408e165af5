"""Command-line entry point.

Verbs: ``validate``, ``run``, ``sweep``, ``demo-amplitude``, ``analyze``.
Exit codes: 0 success, 1 validation failure, 2 runtime failure.
"""
import argparse
import math
import os
import sys
import warnings
from dataclasses import replace

from . import io
from .analysis import collinearity_report, numerical_rank
from .exceptions import ScenarioError
from .experiments import (
    METRIC_COLUMNS,
    PLANS,
    load_plan,
    plan_preset,
    run_amplitude_demo,
    run_scenario,
    run_sweep,
    metrics_row,
    write_run_outputs,
)
from .geometry import FarFieldWarning
from .scenario import PRESETS, load_scenario, preset, validate_scenario

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2


def _snr(text):
    if text.lower() in ("none", "inf", "noiseless"):
        return None
    v = float(text)
    return None if math.isinf(v) else v


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _scenario_args(p, default_preset=None):
    src = p.add_mutually_exclusive_group(required=default_preset is None)
    src.add_argument("--scenario", metavar="PATH", help="YAML scenario file")
    src.add_argument("--preset", metavar="NAME", default=default_preset, help=f"one of: {', '.join(PRESETS)}")
    p.add_argument("--seed", type=_u64, help="override the scenario seed")
    p.add_argument("--snr-db", type=_snr, default=argparse.SUPPRESS, help="measurement SNR in dB ('none' for noiseless)")


def build_parser():
    parser = argparse.ArgumentParser(prog="risimaging", description="Multi-RIS passive imaging simulator")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("validate", help="check a scenario and report far-field warnings")
    _scenario_args(p)

    p = sub.add_parser("run", help="single reconstruction")
    _scenario_args(p)
    p.add_argument("--solver", choices=("ls", "amplitude"))
    p.add_argument("--out", metavar="DIR", default="out")
    p.add_argument("--png", action="store_true", help="also write PNG images")

    p = sub.add_parser("sweep", help="parameter sweep")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--plan", metavar="PATH", help="YAML plan file")
    src.add_argument("--preset", metavar="NAME", help=f"one of: {', '.join(PLANS)}")
    p.add_argument("--seed", type=_u64)
    p.add_argument("--snr-db", type=_snr, default=argparse.SUPPRESS)
    p.add_argument("--solver", choices=("ls", "amplitude"))
    p.add_argument("--repetitions", type=int)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", metavar="DIR", default="out")
    p.add_argument("--png", action="store_true")

    p = sub.add_parser("demo-amplitude", help="amplitude-only per-RIS vs joint reconstruction")
    _scenario_args(p, default_preset="chamber")
    p.add_argument("--out", metavar="DIR", default="out")
    p.add_argument("--png", action="store_true")

    p = sub.add_parser("analyze", help="rank, singular values and collinearity of H")
    _scenario_args(p)
    p.add_argument("--out", metavar="DIR")
    return parser


def _resolve(args):
    scn = load_scenario(args.scenario) if args.scenario else preset(args.preset)
    kw = {}
    if args.seed is not None:
        kw["seed"] = args.seed
    if hasattr(args, "snr_db"):
        kw["snr_db"] = args.snr_db
    if getattr(args, "solver", None):
        kw["solver"] = args.solver
    return replace(scn, **kw) if kw else scn


def _fmt_point(p):
    return "(" + ", ".join(f"{float(c):.3f}" for c in p) + ")"


def _summary(scn):
    g = scn.grid
    print(f"scenario {scn.name}: K={scn.num_panels} T={scn.snapshots} M={g.size} grid={g.counts} seed={scn.seed}")
    for k, (p, rx) in enumerate(zip(scn.panels, scn.receivers)):
        print(f"  panel {k}: {p.rows}x{p.cols} at {_fmt_point(p.center)} rx {_fmt_point(rx)}")


def cmd_validate(args):
    scn = _resolve(args)
    _summary(scn)
    for note in validate_scenario(scn):
        print(f"warning: {note}")
    print("ok")
    return EXIT_OK


def cmd_run(args):
    scn = _resolve(args)
    out = run_scenario(scn)
    write_run_outputs(out, args.out, "run", args.png)
    io.write_csv(os.path.join(args.out, "metrics.csv"), [metrics_row(0, 0, scn.name, scn, out.result.method, out)], METRIC_COLUMNS)
    m = out.metrics
    print(f"{scn.name}: rank {out.rank.rank}/{out.rank.bound} rmse {m.rmse:.4g} ssim {m.ssim:.4f} complex_error {m.complex_error:.4g}")
    return EXIT_OK


def cmd_sweep(args):
    if args.plan:
        plan = load_plan(args.plan)
    else:
        plan = plan_preset(args.preset)
    kw = {}
    if args.seed is not None:
        kw["seed"] = args.seed
    if args.repetitions is not None:
        kw["repetitions"] = args.repetitions
    if args.solver:
        kw["solver"] = args.solver
    if hasattr(args, "snr_db"):
        kw["base"] = replace(plan.base, snr_db=args.snr_db)
    if kw:
        plan = replace(plan, **kw)
    rows = run_sweep(plan, args.out, threads=max(1, args.threads), png=args.png)
    failed = 0
    for r in rows:
        if r["status"] == "ok":
            print(f"{r['label']:>12} rep {r['repetition']}: rank {r['rank']} ssim {r['ssim']:.4f} rmse {r['rmse']:.4g}")
        else:
            failed += 1
            print(f"{r['label']:>12} rep {r['repetition']}: {r['status']}")
    print(f"wrote {os.path.join(args.out, 'metrics.csv')}")
    return EXIT_RUNTIME if failed == len(rows) else EXIT_OK


def cmd_demo(args):
    scn = _resolve(args)
    rows, _ = run_amplitude_demo(scn, args.out, args.png)
    for r in rows:
        print(f"{r['config']:>6}: complex_error {r['complex_error']:.4g} ssim {r['ssim']:.4f} peak {r['peak_cell']} (true {r['true_peak_cell']})")
    return EXIT_OK


def cmd_analyze(args):
    scn = _resolve(args)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FarFieldWarning)
        H = scn.imaging_matrix()
    rep = numerical_rank(H)
    col = collinearity_report(scn.grid, scn.panels, carrier=scn.carrier)
    sv = rep.singular_values
    print(f"{scn.name}: shape {H.shape} rank {rep.rank} bound {rep.bound} threshold {rep.threshold:.3g}")
    if len(sv):
        print(f"  sigma_max {sv[0]:.4g} sigma_min {sv[-1]:.4g}")
    print(f"  collinear pairs {col.total_pairs} (joint {len(col.joint_pairs)})")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        io.write_singular_values(os.path.join(args.out, "spectrum.csv"), sv)
        io.write_collinearity(os.path.join(args.out, "collinearity.csv"), col)
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "run": cmd_run,
    "sweep": cmd_sweep,
    "demo-amplitude": cmd_demo,
    "analyze": cmd_analyze,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        return COMMANDS[args.verb](args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
