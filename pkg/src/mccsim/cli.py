"""Command-line entry point: ``mccsim {simulate,fig3,fig4,tails,bounds}``.

Exit codes: 0 success, 1 invalid configuration, 2 numerical failure,
3 failed tail check (``tails`` only).
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .channel import ScatteringModel
from .errors import CalibrationUnavailable, InvalidParameter, NumericalFailure, SingularityError
from .harness import (ExperimentSpec, ResultTable, TailSizes, bound_table, run_fig3, run_fig4,
                      validate_tails)
from .simcore import SimConfig, estimate_outage

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CHECK = 0, 1, 2, 3

_FLOAT_KEYS = {"density", "cluster_size", "alpha", "theta", "omega", "delta", "delta_prime", "gamma",
               "disk_radius", "outage_cap_epsilon"}
_INT_KEYS = {"trials", "seed"}
_OTHER_KEYS = {"scattering", "scenario", "diversity_pmf", "sweep", "scenarios", "scatterings", "output_path"}
CONFIG_KEYS = _FLOAT_KEYS | _INT_KEYS | _OTHER_KEYS


def _split(v: str) -> list[str]:
    return [s.strip() for s in v.replace(";", ",").split(",") if s.strip()]


def _parse_pmf(v: str) -> dict:
    pmf = {}
    for item in _split(v):
        n, _, p = item.partition(":")
        pmf[int(n)] = float(p) if p else 1.0
    return pmf


def read_config(path) -> dict:
    """Parse a flat ``key = value`` file (``#`` comments).  Unknown keys raise."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string("[spec]\n" + Path(path).read_text())
    except (OSError, configparser.Error) as exc:
        raise InvalidParameter(f"cannot read config {path}: {exc}") from exc
    raw = dict(parser["spec"])
    unknown = sorted(set(raw) - CONFIG_KEYS)
    if unknown:
        raise InvalidParameter(f"unknown config keys: {', '.join(unknown)}")
    out = {}
    try:
        for k, v in raw.items():
            if k in _FLOAT_KEYS:
                out[k] = float(v)
            elif k in _INT_KEYS:
                out[k] = int(v, 0)
            elif k == "sweep":
                out[k] = tuple(float(x) for x in _split(v))
            elif k in ("scenarios", "scatterings"):
                out[k] = tuple(_split(v))
            elif k == "diversity_pmf":
                out[k] = _parse_pmf(v)
            else:
                out[k] = v.strip()
    except ValueError as exc:
        raise InvalidParameter(f"bad value in config: {exc}") from exc
    return out


def build_spec(values: dict, args) -> ExperimentSpec:
    v = dict(values)
    for flag in ("seed", "trials"):
        if getattr(args, flag, None) is not None:
            v[flag] = getattr(args, flag)
    kind = v.pop("scattering", "sparse")
    sparse_kw = {k: v.pop(k) for k in ("delta", "delta_prime", "gamma") if k in v}
    pmf = v.pop("diversity_pmf", None)
    if kind == "sparse":
        model = ScatteringModel.sparse(**sparse_kw)
    elif kind == "rich":
        model = ScatteringModel.rich(pmf)
    else:
        raise InvalidParameter(f"unknown scattering {kind!r}")
    spec_kw = {k: v.pop(k) for k in ("sweep", "scenarios", "scatterings", "outage_cap_epsilon", "output_path")
               if k in v}
    if getattr(args, "out", None):
        spec_kw["output_path"] = args.out
    return ExperimentSpec(base=SimConfig(scattering=model, **v), **spec_kw)


def _emit(text: str, path):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _emit_table(table: ResultTable, args):
    text = table.to_json() if args.format == "json" else table.to_csv()
    _emit(text, args.out)
    if args.gnuplot:
        table.to_gnuplot(args.gnuplot)
    return EXIT_OK


def _progress(args):
    if args.quiet:
        return None
    return lambda row: print(f"  {row.scattering:6s} {row.scenario:14s} ell={row.ell}", file=sys.stderr)


def cmd_simulate(spec: ExperimentSpec, args) -> int:
    cfg = spec.base
    if args.ell is not None:
        cfg = cfg.with_(cluster_size=args.ell)
    if args.scenario:
        cfg = cfg.with_(scenario=args.scenario)
    est = estimate_outage(cfg, args.threads)
    rec = {"cluster_size": cfg.cluster_size, "scenario": cfg.scenario, "scattering": cfg.scattering.kind,
           "seed": cfg.seed, **asdict(est)}
    if args.format == "json":
        _emit(json.dumps(rec, indent=2), args.out)
    else:
        keys = list(rec)
        _emit(",".join(keys) + "\n" + ",".join("" if rec[k] is None else repr(rec[k]) if isinstance(rec[k], float)
                                               else str(rec[k]) for k in keys) + "\n", args.out)
    return EXIT_OK


def cmd_fig3(spec: ExperimentSpec, args) -> int:
    table = run_fig3(spec, args.threads, _progress(args))
    _emit_table(table, args)
    return EXIT_NUMERIC if table.partial else EXIT_OK


def cmd_fig4(spec: ExperimentSpec, args) -> int:
    table = run_fig4(spec, args.threads, _progress(args))
    _emit_table(table, args)
    return EXIT_NUMERIC if table.partial else EXIT_OK


def cmd_tails(spec: ExperimentSpec, args) -> int:
    sizes = TailSizes(pg_draws=args.pg_draws) if args.pg_draws else TailSizes()
    report = validate_tails(spec.base, sizes)
    if args.format == "json":
        text = json.dumps({"passed": report.passed, "checks": [asdict(c) for c in report.checks]}, indent=2)
    else:
        text = "\n".join(report.lines()) + "\n"
    _emit(text, args.out)
    return EXIT_OK if report.passed else EXIT_CHECK


def cmd_bounds(spec: ExperimentSpec, args) -> int:
    rows = bound_table(spec)
    if args.format == "json":
        text = json.dumps(rows, indent=2)
    else:
        cols = ["ell", "scenario", "scattering", "ope_lower", "ope_upper", "regime"]
        text = ",".join(cols) + "\n" + "".join(
            ",".join(repr(r[c]) if isinstance(r[c], float) else str(r[c]) for c in cols) + "\n" for r in rows)
    _emit(text, args.out)
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "fig3": cmd_fig3, "fig4": cmd_fig4, "tails": cmd_tails, "bounds": cmd_bounds}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file with experiment fields")
    common.add_argument("--seed", type=lambda s: int(s, 0), help="64-bit master seed")
    common.add_argument("--trials", type=int, help="Monte Carlo trials per estimate")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--threads", type=int, default=0, help="worker threads, 0 = auto")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--quiet", action="store_true", help="suppress progress on stderr")

    p = argparse.ArgumentParser(prog="mccsim", description="Outage simulation for clustered cooperation.")
    p.add_argument("--version", action="version", version=f"mccsim {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("simulate", parents=[common], help="one outage estimate")
    s.add_argument("--ell", type=float, help="expected cluster size (overrides config)")
    s.add_argument("--scenario", choices=("cluster-center", "typical", "no-mcc"))
    for name, text in (("fig3", "outage probability sweep"), ("fig4", "outage capacity sweep")):
        f = sub.add_parser(name, parents=[common], help=text)
        f.add_argument("--gnuplot", help="also write a gnuplot data file")
    t = sub.add_parser("tails", parents=[common], help="empirical vs analytic tail checks")
    t.add_argument("--pg-draws", type=int, help="draws for the P*G tail checks")
    sub.add_parser("bounds", parents=[common], help="analytic OPE bound curves")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        values = read_config(args.config) if args.config else {}
        spec = build_spec(values, args)
        if args.threads < 0:
            raise InvalidParameter("threads must be >= 0")
        return COMMANDS[args.command](spec, args)
    except (InvalidParameter, CalibrationUnavailable, TypeError) as exc:
        print(f"mccsim: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, SingularityError) as exc:
        print(f"mccsim: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
