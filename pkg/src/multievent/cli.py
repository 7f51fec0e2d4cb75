"""Command-line interface.

    multievent ingest   --data DIR [--out DIR]
    multievent estimate --data DIR --policy NAME [--outcome NAME] --out DIR
    multievent estimate --simulate CONFIG --all --out DIR --jobs 4
    multievent summary  --data DIR --out DIR
    multievent simulate CONFIG --out DIR
    multievent run      OUT/manifest.json [--out DIR]

Exit status: 0 success, 1 partial failure, 2 invalid invocation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .design import Controls
from .ingest import FILE_NAMES, IngestError, load_sources, resolve_paths
from .panel import PanelError
from .report import (ManifestError, RunManifest, full_batch, run_estimate, run_manifest,
                     run_simulate, run_summary, spec_entry)
from .simgen import ConfigError, config_from_dict

log = logging.getLogger("multievent")

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _window(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must look like LO:HI, got {text!r}") from None
    if lo >= hi:
        raise argparse.ArgumentTypeError("window LO must be below HI")
    return lo, hi


def _add_inputs(p: argparse.ArgumentParser, allow_sim: bool) -> None:
    g = p.add_argument_group("inputs")
    g.add_argument("--data", metavar="DIR", help="directory holding the four canonical files")
    for key, name in FILE_NAMES.items():
        g.add_argument(f"--{key}", metavar="FILE", help=f"path to {name} (overrides --data)")
    if allow_sim:
        g.add_argument("--simulate", metavar="CONFIG",
                       help="simulation config (JSON) to generate the panel in memory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multievent", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate canonical input files")
    _add_inputs(p, allow_sim=False)
    p.add_argument("--out", metavar="DIR", help="write ingest_report.json here")

    p = sub.add_parser("estimate", help="batch event-study estimation")
    _add_inputs(p, allow_sim=True)
    p.add_argument("--manifest", metavar="FILE", help="re-run an existing run manifest")
    p.add_argument("--policy", action="append", default=[], help="policy of interest (repeatable)")
    p.add_argument("--outcome", action="append", default=[],
                   help="outcome (repeatable; default cases_ihs_ma3)")
    p.add_argument("--all", action="store_true", help="every policy x the 7 main outcomes")
    p.add_argument("--variant", default="eq3", choices=["eq1", "eq2", "eq3-single", "eq3"])
    p.add_argument("--window", type=_window, default=(-20, 35), metavar="LO:HI")
    p.add_argument("--ref", type=int, default=-20, metavar="J", help="omitted event time")
    p.add_argument("--cluster", default="country", choices=["country", "row"])
    p.add_argument("--no-control", action="append", default=[], dest="no_control",
                   choices=list(vars(Controls()).keys()), help="drop a control family")
    p.add_argument("--out", metavar="DIR")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")

    p = sub.add_parser("summary", help="descriptive statistics of timing and mobility")
    _add_inputs(p, allow_sim=True)
    p.add_argument("--out", metavar="DIR", required=True)

    p = sub.add_parser("simulate", help="write a synthetic panel as canonical files")
    p.add_argument("config", help="simulation config (JSON)")
    p.add_argument("--out", metavar="DIR", required=True)

    p = sub.add_parser("run", help="reproduce outputs from a run manifest")
    p.add_argument("manifest")
    p.add_argument("--out", metavar="DIR", help="default: the manifest's directory")
    p.add_argument("--jobs", type=int, default=1)
    return parser


def _read_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        return config_from_dict(raw).to_dict()
    except (OSError, json.JSONDecodeError, ConfigError, ValueError, TypeError) as exc:
        raise UsageError(f"invalid simulation config {path}: {exc}") from None


def _input_fields(args) -> tuple[dict | None, dict | None]:
    sim = getattr(args, "simulate", None)
    explicit = {k: getattr(args, k) for k in FILE_NAMES if getattr(args, k)}
    if sim and (args.data or explicit):
        raise UsageError("--simulate cannot be combined with input files")
    if sim:
        return None, _read_config(sim)
    try:
        paths = resolve_paths(args.data, **explicit)
    except ValueError as exc:
        raise UsageError(f"{exc}; give --data DIR or all four file options") from None
    missing = [str(p) for p in paths.values() if not p.is_file()]
    if missing:
        raise UsageError(f"input file(s) not found: {', '.join(missing)}")
    return {k: str(p.resolve()) for k, p in paths.items()}, None


def _cmd_ingest(args) -> int:
    inputs, _ = _input_fields(args)
    try:
        fileset, *_ = load_sources(inputs)
    except (IngestError, PanelError) as exc:
        print(f"ingest failed: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    report = json.dumps(fileset.to_dict(), indent=2) + "\n"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "ingest_report.json").write_text(report, encoding="utf-8")
    print(report, end="")
    return EXIT_OK


def _cmd_estimate(args) -> int:
    if args.manifest:
        manifest = RunManifest.load(args.manifest)
        out = args.out or str(Path(args.manifest).parent / manifest.output_dir)
        return run_estimate(manifest, out, jobs=args.jobs)
    if not args.out:
        raise UsageError("--out is required")
    inputs, sim = _input_fields(args)
    controls = {k: k not in args.no_control for k in vars(Controls())}
    common = dict(window=args.window, ref=args.ref, cluster=args.cluster, controls=controls)
    if args.all:
        if args.policy or args.outcome:
            raise UsageError("--all cannot be combined with --policy/--outcome")
        specs = full_batch(args.variant, **common)
    else:
        if not args.policy:
            raise UsageError("give --policy NAME (repeatable) or --all")
        outcomes = args.outcome or ["cases_ihs_ma3"]
        specs = [spec_entry(p, o, args.variant, **common) for p in args.policy for o in outcomes]
    manifest = RunManifest("estimate", inputs=inputs, simulation=sim, specs=specs,
                           seed=sim.get("seed") if sim else None)
    return run_estimate(manifest, args.out, jobs=args.jobs)


def _cmd_summary(args) -> int:
    inputs, sim = _input_fields(args)
    manifest = RunManifest("summary", inputs=inputs, simulation=sim,
                           seed=sim.get("seed") if sim else None)
    return run_summary(manifest, args.out)


def _cmd_simulate(args) -> int:
    cfg = _read_config(args.config)
    manifest = RunManifest("simulate", simulation=cfg, seed=cfg.get("seed"))
    return run_simulate(manifest, args.out)


def _cmd_run(args) -> int:
    manifest = RunManifest.load(args.manifest)
    out = args.out or str(Path(args.manifest).parent / manifest.output_dir)
    return run_manifest(manifest, out, jobs=args.jobs)


COMMANDS = {"ingest": _cmd_ingest, "estimate": _cmd_estimate, "summary": _cmd_summary,
            "simulate": _cmd_simulate, "run": _cmd_run}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ManifestError) as exc:
        print(f"multievent: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IngestError, PanelError) as exc:
        print(f"multievent: input error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
