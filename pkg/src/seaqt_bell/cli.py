"""Command-line entry point: ``seaqt-bell <command> [scenario] [options]``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O error.
"""

import argparse
import logging
import sys
from pathlib import Path

import yaml

from .integrate import StepRejected
from .perturbation import AllRootsInvalid, NoRootFound
from .seaqt import DegenerateGram
from .experiments import config as cfgmod
from .experiments import runners
from .experiments.scenarios import PAPER_BATCH_N, REGISTRY

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

NUMERICAL_ERRORS = (StepRejected, NoRootFound, AllRootsInvalid, DegenerateGram,
                    runners.BatchAborted, runners.CalibrationError)

log = logging.getLogger("seaqt_bell")


def _u64(text):
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _global_flags(parser, suppress):
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--config", type=Path, default=default(None), help="YAML config or run manifest")
    parser.add_argument("--out", type=Path, default=default(None), help="output directory")
    parser.add_argument("--seed", type=_u64, default=default(None), help="base seed for random perturbations")
    parser.add_argument("--threads", type=_positive, default=default(1), help="worker threads")


def build_parser():
    parser = argparse.ArgumentParser(prog="seaqt-bell", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("evolve", "write one trace CSV per trajectory"),
                       ("sweep", "zeta / c1 sweep summary"),
                       ("batch", "general-perturbation batch statistics"),
                       ("compare", "SEAQT and Lindblad side by side")):
        p = sub.add_parser(name, help=text)
        p.add_argument("scenario", nargs="?", help="registered scenario (see list-scenarios)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config value, e.g. integration.t_end=1.5")
        if name == "batch":
            p.add_argument("--preset", choices=("ci", "paper"),
                           help=f"batch size preset: ci (300) or paper ({PAPER_BATCH_N})")
        _global_flags(p, suppress=True)
    p = sub.add_parser("overlay", help="compare measured points against a trace CSV")
    p.add_argument("--data", type=Path, required=True, help="CSV with t and E and/or B_max")
    p.add_argument("--trace", type=Path, required=True, help="trace CSV written by evolve")
    _global_flags(p, suppress=True)
    p = sub.add_parser("list-scenarios", help="list registered scenarios")
    _global_flags(p, suppress=True)
    return parser


def parse_set(items):
    """Turn ``a.b=value`` strings into a nested override dict (values parsed as YAML)."""
    tree = {}
    for item in items:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise cfgmod.ConfigError(item, "expected KEY=VALUE")
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise cfgmod.ConfigError(key, f"cannot parse value {raw!r}") from exc
        node = tree
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    return tree


def _config_for(args):
    overrides = parse_set(args.set)
    if args.scenario:
        overrides["scenario"] = args.scenario
    if args.seed is not None:
        overrides = cfgmod.merge(overrides, {"perturbation": {"base_seed": args.seed}})
    if getattr(args, "preset", None):
        n = PAPER_BATCH_N if args.preset == "paper" else 300
        overrides = cfgmod.merge(overrides, {"perturbation": {"n": n}})
    cfg = cfgmod.build_config(path=args.config, overrides=overrides)
    kind = REGISTRY[cfg.scenario].kind
    if kind != args.command:
        raise cfgmod.ConfigError("scenario", f"{cfg.scenario} is a {kind} scenario, not {args.command}")
    return cfg


def _list_scenarios(out):
    width = max(len(n) for n in REGISTRY)
    for s in REGISTRY.values():
        out.write(f"{s.name:<{width}}  {s.figure:<10}  {s.kind:<8}  {s.description}\n")


def main(argv=None, stdout=None):
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "list-scenarios":
            _list_scenarios(stdout)
            return EXIT_OK
        if args.command == "overlay":
            report = runners.overlay_experimental(args.data, args.trace)
            path = runners.write_overlay(report, args.out or Path("."))
            for col, r in report.residuals.items():
                stdout.write(f"{col}: max {r['max']:.6g}  mean {r['mean']:.6g}  (n={report.n_points})\n")
            stdout.write(f"wrote {path}\n")
            return EXIT_OK
        cfg = _config_for(args)
        out = args.out or Path("runs") / cfg.scenario
        result = runners.RUNNERS[args.command](cfg, out, threads=args.threads)
        stdout.write(f"{cfg.scenario}: wrote {len(result.files)} file(s) and manifest to {result.out_dir}\n")
        if result.rejected:
            # outputs stay on disk for inspection; the run still counts as failed
            log.error("numerical failure: step rejected for %s (see manifest)", ", ".join(result.rejected))
            return EXIT_NUMERICAL
        return EXIT_OK
    except cfgmod.ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except NUMERICAL_ERRORS as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    except (OSError, runners.OverlayError) as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
