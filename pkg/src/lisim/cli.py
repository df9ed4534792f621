"""Command-line entry point: run, sweep, fig2 and fig3 subcommands.

Exit codes: 0 success, 1 configuration error, 2 numerical invariant violation.
"""

from __future__ import annotations

import argparse
import sys

from . import report, scenario
from .errors import ConfigError, NumericalError


def _parse_values(raw: str) -> tuple:
    out = []
    for tok in raw.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            out.append(int(tok))
        except ValueError:
            out.append(float(tok))
    if not out:
        raise ConfigError("empty --values list")
    return tuple(out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lisim", description=__doc__)
    parser.add_argument("--threads", type=int, default=1, help="parallel sweep workers")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario config")
    p_run.add_argument("--config", required=True, help="scenario JSON file")
    p_run.add_argument("--out", required=True, help="output CSV path")

    p_sweep = sub.add_parser("sweep", help="sweep one parameter over a scenario config")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--param", required=True, choices=scenario.SWEEP_PARAMETERS)
    p_sweep.add_argument("--values", required=True, help="comma-separated value list")
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--no-plot", action="store_true", help="skip figure rendering")

    for name, help_ in (
        ("fig2", "WMMSE sum-capacity vs users sweep"),
        ("fig3", "MF received-power vs grid-density sweep"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--out", required=True)
        p.add_argument("--no-plot", action="store_true", help="skip figure rendering")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = scenario.load_config(args.config)
            rows = [scenario.run(config)]
            report.emit_csv(rows, args.out)
            report.emit_meta(args.out, scenario.config_to_dict(config), rows)
        elif args.command == "sweep":
            config = scenario.load_config(args.config)
            spec = scenario.SweepSpec(
                parameter=args.param, values=_parse_values(args.values), base=config
            )
            rows = scenario.sweep(spec, threads=args.threads)
            report.emit_csv(rows, args.out)
            meta = {"base": scenario.config_to_dict(config), "param": args.param, "values": list(spec.values)}
            report.emit_meta(args.out, meta, rows)
            if not args.no_plot:
                report.render_generic_figure(rows, args.out)
        elif args.command == "fig2":
            points = scenario.fig2_points()
            rows = scenario.run_points(points, threads=args.threads)
            report.emit_csv(rows, args.out)
            report.emit_meta(args.out, {"recipe": "fig2"}, rows)
            if not args.no_plot:
                report.render_capacity_figure(rows, args.out)
        elif args.command == "fig3":
            points = scenario.fig3_points()
            rows = scenario.run_points(points, threads=args.threads)
            report.emit_csv(rows, args.out)
            report.emit_meta(args.out, {"recipe": "fig3"}, rows)
            if not args.no_plot:
                report.render_received_power_figure(rows, args.out)
    except (ConfigError, FileNotFoundError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
