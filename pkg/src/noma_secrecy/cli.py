"""Command-line entry point: ``noma-secrecy {sop,sweep,figure,validate,diversity}``.

Every configuration key has a ``--<key>`` flag; flags override the JSON
file given with ``--config``. The seed defaults to $NOMA_SECRECY_SEED.

Exit status: 0 success, 1 configuration error, 2 numerical failure,
3 validation failures.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from .config import CONFIG_FIELDS, ConfigError, Scenario, SicMode, SystemConfig, load_config, validate_config
from .experiments import FIGURES, parse_range, run_figure, run_sweep, summarize_report, validate_report
from .numerics import IntegrationError
from .sop import DEFAULT_DIVERSITY_GRID, diversity_order, sop_asymptotic, sop_exact

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VALIDATION = 0, 1, 2, 3

_INT_FIELDS = {"K", "U", "M"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors are configuration errors
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _default_seed() -> int:
    raw = os.environ.get("NOMA_SECRECY_SEED")
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError([("NOMA_SECRECY_SEED", f"not an integer: {raw!r}")]) from None


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with the base configuration")
    g = p.add_argument_group("configuration overrides")
    for name in CONFIG_FIELDS:
        if name == "sic":
            g.add_argument("--sic", choices=["perfect", "imperfect", "psic", "ipsic"])
            g.add_argument("--varpi", type=float, help="residual interference level for imperfect SIC")
        elif name in _INT_FIELDS:
            g.add_argument(f"--{name}", type=int)
        else:
            g.add_argument(f"--{name}", type=float)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--iterations", type=int, default=20000)


def build_config(args) -> SystemConfig:
    cfg = load_config(args.config) if args.config else SystemConfig()
    over = {}
    for name in CONFIG_FIELDS:
        if name == "sic":
            continue
        val = getattr(args, name, None)
        if val is not None:
            over[name] = val
    sic = cfg.sic
    if args.sic is not None:
        sic = SicMode.from_json(args.sic)
    if args.varpi is not None:
        if sic.is_perfect and args.sic is None:
            sic = SicMode.imperfect(args.varpi)
        else:
            sic = dataclasses.replace(sic, varpi=args.varpi)
    over["sic"] = sic
    return validate_config(dataclasses.replace(cfg, **over))


def _scenarios(values) -> list[Scenario]:
    if not values or values == ["all"]:
        return list(Scenario)
    out = []
    for v in values:
        for part in v.split(","):
            try:
                out.append(Scenario(part))
            except ValueError:
                raise ConfigError([("scenario", f"unknown scenario {part!r}")]) from None
    return out


def _cmd_sop(args, cfg) -> int:
    from . import montecarlo as mc

    out = []
    batch = None
    for sc in _scenarios(args.scenario):
        for method in args.method.split(","):
            if method == "exact":
                est = sop_exact(cfg, sc)
                out.append({"scenario": sc.value, "method": method, "value": est.value, "notes": est.notes})
            elif method == "asymptotic":
                est = sop_asymptotic(cfg, sc)
                out.append({"scenario": sc.value, "method": method, "value": est.value, "notes": est.notes})
            elif method == "mc":
                if batch is None:
                    batch = mc.simulate(cfg, args.iterations, args.seed, args.workers)
                e = mc.estimate_sop_mc(cfg, sc, args.iterations, args.seed, batch=batch)
                out.append({"scenario": sc.value, "method": method, "value": e.value,
                            "ci_half_width": e.ci_half_width, "iterations": e.iterations, "seed": e.seed})
            else:
                raise ConfigError([("method", f"unknown method {method!r}")])
    json.dump(out, sys.stdout, indent=2)
    print()
    return EXIT_OK


def _cmd_sweep(args, cfg) -> int:
    res = run_sweep(cfg, _scenarios(args.scenario), parse_range(args.rho), args.methods.split(","),
                    args.iterations, args.seed, args.workers, out_path=args.out)
    if args.out is None:
        sys.stdout.write(res.to_csv_string())
    return EXIT_OK


def _cmd_figure(args, cfg) -> int:
    methods = args.methods.split(",") if args.methods else None
    res = run_figure(args.name, args.out, cfg, methods, args.iterations, args.seed, args.workers)
    print(f"wrote {len(res)} variant files and manifest.json to {args.out}")
    return EXIT_OK


def _cmd_validate(args, cfg) -> int:
    rep = validate_report(cfg, args.iterations, args.seed, args.workers,
                          rho_grid_db=parse_range(args.rho), stress=not args.no_stress)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(rep, fh, indent=2)
    print(summarize_report(rep))
    return EXIT_OK if rep["passed"] else EXIT_VALIDATION


def _cmd_diversity(args, cfg) -> int:
    fits = []
    for sc in _scenarios(args.scenario):
        fit = diversity_order(cfg, sc, parse_range(args.rho))
        fits.append({"scenario": sc.value, **dataclasses.asdict(fit)})
    json.dump(fits, sys.stdout, indent=2)
    print()
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="noma-secrecy", description="Secrecy outage of CD/PD-NOMA under random eavesdroppers")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("sop", help="SOP at one operating point")
    _add_config_flags(s)
    s.add_argument("--scenario", action="append", help="scenario name(s), comma separated; default all")
    s.add_argument("--method", default="exact", help="exact, asymptotic, mc (comma separated)")
    s.set_defaults(func=_cmd_sop)

    s = sub.add_parser("sweep", help="SOP against transmit SNR, CSV out")
    _add_config_flags(s)
    s.add_argument("--scenario", action="append")
    s.add_argument("--rho", default="0:60:5", help="lo:hi:step in dB or a comma list")
    s.add_argument("--methods", default="exact")
    s.add_argument("--out", help="CSV path (stdout if omitted)")
    s.set_defaults(func=_cmd_sweep)

    s = sub.add_parser("figure", help="data for one figure preset")
    s.add_argument("name", choices=FIGURES)
    _add_config_flags(s)
    s.add_argument("--methods", default=None)
    s.add_argument("--out", default=".", help="output directory")
    s.set_defaults(func=_cmd_figure)

    s = sub.add_parser("validate", help="closed forms against simulation")
    _add_config_flags(s)
    s.set_defaults(iterations=100_000)
    s.add_argument("--rho", default="10,20,30,40")
    s.add_argument("--out", help="JSON report path")
    s.add_argument("--no-stress", action="store_true", help="skip the stressed arbitration configs")
    s.set_defaults(func=_cmd_validate)

    s = sub.add_parser("diversity", help="secrecy diversity order fit")
    _add_config_flags(s)
    s.add_argument("--scenario", action="append")
    s.add_argument("--rho", default=",".join(str(r) for r in DEFAULT_DIVERSITY_GRID))
    s.set_defaults(func=_cmd_diversity)
    return p


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        if args.seed is None:
            args.seed = _default_seed()
        cfg = build_config(args)
        return args.func(args, cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (KeyError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, ArithmeticError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
