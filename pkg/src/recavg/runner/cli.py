"""Command-line interface.

Subcommands: simulate, demo, sweep, verify, plot. Output lands under --out,
or the RECAVG_OUT_ROOT environment variable, or ./out. Exit codes: 0 on
success, 2 on configuration errors, 3 on numerical divergence, 4 on
verification failure.
"""

import argparse
import os
import sys

from ..odeint import DivergenceError
from .artifacts import read_csv, run_scenario
from .config import ConfigError, load_config, parse_pi_value
from .scenarios import BUILTIN_NAMES, built_in
from .sweep import run_sweep
from .verify import verify_averaging

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_VERIFY = 4

OUT_ROOT_ENV = "RECAVG_OUT_ROOT"


def _out_root(explicit):
    if explicit:
        return explicit
    return os.environ.get(OUT_ROOT_ENV, "out")


def _parse_omegas(text):
    try:
        values = [parse_pi_value(tok.strip(), "omega") for tok in text.split(",") if tok.strip()]
    except ConfigError as exc:
        raise ConfigError(f"--omegas: {exc}") from exc
    if len(values) < 3:
        raise ConfigError("--omegas: need at least 3 comma-separated values")
    return values


def build_parser():
    parser = argparse.ArgumentParser(
        prog="recavg",
        description="Two-timescale averaging and 3D source-seeking simulations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a scenario from a config file")
    p_sim.add_argument("--config", required=True, help="path to a scenario JSON file")
    p_sim.add_argument("--out", default=None, help="output directory root")

    p_demo = sub.add_parser("demo", help="run a built-in scenario")
    p_demo.add_argument("name", choices=list(BUILTIN_NAMES))
    p_demo.add_argument("--out", default=None, help="output directory root")

    p_sweep = sub.add_parser("sweep", help="frequency sweep against the averaged flow")
    p_sweep.add_argument("--config", default=None, help="scenario JSON (default: ex1)")
    p_sweep.add_argument(
        "--omegas", required=True,
        help="comma-separated frequencies, numbers or 'Npi' (at least 3)",
    )
    p_sweep.add_argument("--t-final", type=float, default=20.0)
    p_sweep.add_argument("--out", default=None, help="output directory root")

    p_verify = sub.add_parser("verify", help="check the averaging conventions")
    p_verify.add_argument(
        "--flip-bracket", action="store_true",
        help="deliberately invert the bracket sign (must fail)",
    )
    p_verify.add_argument(
        "--swap-prefactors", action="store_true",
        help="deliberately swap the 1/2 prefactor placement (must fail)",
    )

    p_plot = sub.add_parser("plot", help="regenerate SVG plots from a run directory")
    p_plot.add_argument("--in", dest="in_dir", required=True, help="run directory")
    return parser


def _cmd_simulate(args):
    scenario = load_config(args.config)
    out_dir = os.path.join(_out_root(args.out), scenario.name)
    artifacts = run_scenario(scenario, out_dir)
    print(f"wrote artifacts to {artifacts.run_dir}")
    for rep, info in sorted(artifacts.summary["representations"].items()):
        print(
            f"  {rep}: final c = {info['final_c']:.6g}, "
            f"final distance = {info['final_distance_to_source']:.6g}"
        )
    return EXIT_OK


def _cmd_demo(args):
    scenario = built_in(args.name)
    out_dir = os.path.join(_out_root(args.out), scenario.name)
    artifacts = run_scenario(scenario, out_dir)
    print(f"wrote artifacts to {artifacts.run_dir}")
    for rep, info in sorted(artifacts.summary["representations"].items()):
        print(
            f"  {rep}: final c = {info['final_c']:.6g}, "
            f"final distance = {info['final_distance_to_source']:.6g}"
        )
    return EXIT_OK


def _cmd_sweep(args):
    scenario = load_config(args.config) if args.config else built_in("ex1")
    omegas = _parse_omegas(args.omegas)
    out_dir = os.path.join(_out_root(args.out), f"{scenario.name}_sweep")
    report = run_sweep(scenario, omegas, out_dir, t_final=args.t_final)
    print(f"wrote sweep artifacts to {out_dir}")
    for w, e in zip(report.omegas, report.sup_errors):
        print(f"  omega = {w:10.4f}  sup error = {e:.6g}")
    print(f"  fitted log-log slope = {report.fitted_slope:.4f}")
    print(f"  empirical constant C = {report.empirical_C:.4f}")
    return EXIT_OK


def _cmd_verify(args):
    report = verify_averaging(
        flip_bracket=args.flip_bracket, swap_prefactors=args.swap_prefactors
    )
    for line in report.lines():
        print(line)
    return EXIT_OK if report.passed else EXIT_VERIFY


def _cmd_plot(args):
    import json

    from ..seek3d import signal_field
    from .svgplot import plot_artifacts

    summaries = [
        f for f in sorted(os.listdir(args.in_dir)) if f.endswith("_summary.json")
    ]
    if not summaries:
        raise ConfigError(f"no run summary found in {args.in_dir}")
    with open(os.path.join(args.in_dir, summaries[0]), encoding="utf-8") as fh:
        summary = json.load(fh)
    name = summary["scenario"]
    tables = {}
    for rep, path in summary["files"]["csv"].items():
        if not os.path.exists(path):
            path = os.path.join(args.in_dir, os.path.basename(path))
        _, data = read_csv(path)
        if data.size == 0:
            raise ConfigError(f"trajectory CSV for {rep!r} is empty")
        tables[rep] = data
    field = signal_field(**summary.get("field_spec", {"kind": "static"}))
    paths = plot_artifacts(name, tables, args.in_dir, field)
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "simulate": _cmd_simulate,
        "demo": _cmd_demo,
        "sweep": _cmd_sweep,
        "verify": _cmd_verify,
        "plot": _cmd_plot,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
