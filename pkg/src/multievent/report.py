"""Batch runs driven by a JSON run manifest, and their delimited outputs.

A manifest records everything that determines the output bytes: the inputs
(canonical file paths or an embedded simulation config), the estimation
specs, and the tool version. It is written into every output directory with
``output_dir`` set to ``"."``, meaning the directory holding the manifest, so
re-running a copied manifest elsewhere reproduces identical files.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import __version__
from .design import Controls, EstimationSpec, Variant
from .estimator import estimate
from .ingest import FILE_NAMES, load_panel, write_sources
from .panel import CATEGORIES, POLICIES, Panel, PolicyKind
from .simgen import SirTruth, config_from_dict, simulate
from .transforms import MAIN_OUTCOMES, OutcomeKind

log = logging.getLogger(__name__)

COEF_HEADER = ["j", "alpha", "se", "ci_lo", "ci_hi", "beta", "beta_se"]
DIAG_HEADER = ["spec", "policy", "outcome", "variant", "status", "n", "clusters",
               "p_retained", "dropped_columns", "error"]
MANIFEST_NAME = "manifest.json"


class ManifestError(ValueError):
    pass


@dataclass
class RunManifest:
    command: str
    inputs: Optional[dict[str, str]] = None
    simulation: Optional[dict] = None
    specs: list[dict] = field(default_factory=list)
    output_dir: str = "."
    seed: Optional[int] = None
    tool_version: str = __version__

    def to_dict(self) -> dict:
        return {"tool": "multievent", "tool_version": self.tool_version, "command": self.command,
                "inputs": self.inputs, "simulation": self.simulation, "seed": self.seed,
                "specs": self.specs, "output_dir": self.output_dir}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "RunManifest":
        if d.get("command") not in ("estimate", "summary", "simulate"):
            raise ManifestError(f"manifest command must be estimate, summary or simulate, "
                                f"got {d.get('command')!r}")
        if d["command"] != "simulate" and (d.get("inputs") is None) == (d.get("simulation") is None):
            raise ManifestError("manifest needs exactly one of 'inputs' or 'simulation'")
        if d["command"] == "simulate" and d.get("simulation") is None:
            raise ManifestError("simulate manifest needs 'simulation'")
        return cls(command=d["command"], inputs=d.get("inputs"), simulation=d.get("simulation"),
                   specs=list(d.get("specs") or []), output_dir=d.get("output_dir", "."),
                   seed=d.get("seed"), tool_version=d.get("tool_version", __version__))

    @classmethod
    def load(cls, path) -> "RunManifest":
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ManifestError(f"cannot read manifest {path}: {exc}") from None


def spec_entry(policy: str, outcome: str, variant: str = "eq3", window: tuple[int, int] = (-20, 35),
               ref: int = -20, cluster: str = "country",
               controls: Optional[dict[str, bool]] = None) -> dict:
    """Manifest form of one estimation; names stay unvalidated strings."""
    return {"policy": policy, "outcome": outcome, "variant": variant, "window": list(window),
            "ref": ref, "cluster": cluster,
            "controls": controls if controls is not None else vars(Controls()).copy()}


def spec_from_entry(entry: dict) -> EstimationSpec:
    window = entry.get("window", [-20, 35])
    return EstimationSpec(
        policy=PolicyKind.parse(entry["policy"]),
        outcome=OutcomeKind.parse(entry["outcome"]),
        window_lo=int(window[0]),
        window_hi=int(window[1]),
        reference_event_time=int(entry.get("ref", -20)),
        variant=Variant.parse(entry.get("variant", "eq3")),
        controls=Controls(**entry.get("controls", {})),
        cluster_by=entry.get("cluster", "country"),
    )


def entry_name(entry: dict) -> str:
    return f"{entry.get('policy')}__{entry.get('outcome')}__{entry.get('variant', 'eq3')}"


def full_batch(variant: str = "eq3", **kwargs) -> list[dict]:
    """Every policy against the smoothed-case and six mobility outcomes."""
    return [spec_entry(p.value, o.value, variant, **kwargs) for p in POLICIES for o in MAIN_OUTCOMES]


def panel_for(manifest: RunManifest) -> Panel:
    if manifest.simulation is not None:
        panel, _ = simulate(config_from_dict(manifest.simulation))
        return panel
    panel, _ = load_panel(manifest.inputs)
    return panel


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return ""
        return repr(x)
    return str(x)


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


_WORKER_PANEL: Optional[Panel] = None


def _init_worker(panel: Panel) -> None:
    global _WORKER_PANEL
    _WORKER_PANEL = panel


def _run_one(entry: dict, panel: Optional[Panel] = None) -> dict:
    """Estimate one manifest entry; never raises."""
    panel = panel if panel is not None else _WORKER_PANEL
    out = {"name": entry_name(entry), "entry": entry}
    try:
        spec = spec_from_entry(entry)
        res = estimate(panel, spec)
    except Exception as exc:  # per-spec isolation: record and carry on
        out.update(status="error", error=f"{type(exc).__name__}: {exc}")
        return out
    rows = [[int(j), *(r[c] for c in COEF_HEADER[1:])] for j, r in res.table.iterrows()]
    out.update(status="ok", coef=_csv_text(COEF_HEADER, rows), n=res.n,
               clusters=res.n_clusters, p_retained=res.p_retained,
               dropped=";".join(res.dropped_columns))
    return out


def run_estimate(manifest: RunManifest, out_dir, jobs: int = 1,
                 panel: Optional[Panel] = None) -> int:
    """Run every spec; returns 0 when all succeed and 1 otherwise."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_text(out / MANIFEST_NAME, manifest.dumps())
    if panel is None:
        try:
            panel = panel_for(manifest)
        except Exception as exc:
            log.error("could not build panel: %s", exc)
            results = [{"name": entry_name(e), "entry": e, "status": "error",
                        "error": f"{type(exc).__name__}: {exc}"} for e in manifest.specs]
            _write_diagnostics(out, results)
            return 1
    if jobs > 1 and len(manifest.specs) > 1:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker,
                                 initargs=(panel,)) as pool:
            results = list(pool.map(_run_one, manifest.specs))
    else:
        results = [_run_one(e, panel) for e in manifest.specs]

    names = [r["name"] for r in results]
    seen: dict[str, int] = {}
    for r in results:
        # repeated names (e.g. the same triple with different windows) get a suffix
        seen[r["name"]] = seen.get(r["name"], 0) + 1
        if names.count(r["name"]) > 1:
            r["name"] = f"{r['name']}__{seen[r['name']]}"
        if r["status"] == "ok":
            _write_text(out / "coefficients" / f"{r['name']}.csv", r["coef"])
        else:
            log.error("%s failed: %s", r["name"], r["error"])
    _write_diagnostics(out, results)
    return 0 if all(r["status"] == "ok" for r in results) else 1


def _write_diagnostics(out: Path, results: list[dict]) -> None:
    rows = []
    for r in results:
        e = r["entry"]
        rows.append([r["name"], e.get("policy"), e.get("outcome"), e.get("variant", "eq3"),
                     r["status"], r.get("n"), r.get("clusters"), r.get("p_retained"),
                     r.get("dropped", ""), r.get("error", "")])
    _write_text(out / "diagnostics.csv", _csv_text(DIAG_HEADER, rows))


def implementation_offsets(panel: Panel) -> list[tuple[str, str, int]]:
    """(policy, country, implementation day minus first-case day) for countries
    that ever implement the policy."""
    rows = []
    for p in POLICIES:
        for c in panel.countries:
            impl = panel.implementation_date(c, p)
            if impl is not None:
                rows.append((p.value, c, (impl - panel.first_case[c]).days))
    return rows


def mobility_by_period(panel: Panel) -> list[tuple[str, str, str, str, float]]:
    """Every observed mobility value labelled before/after the first case.
    The first-case day itself counts as after."""
    rows = []
    for cat in CATEGORIES:
        for c in panel.countries:
            m = panel.mobility.get(c)
            if m is None or cat not in m.values:
                continue
            first = panel.first_case[c]
            for d, v in sorted(m.values[cat].items()):
                rows.append((cat.value, c, d.isoformat(), "before" if d < first else "after", v))
    return rows


def run_summary(manifest: RunManifest, out_dir, panel: Optional[Panel] = None) -> int:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_text(out / MANIFEST_NAME, manifest.dumps())
    if panel is None:
        panel = panel_for(manifest)
    offsets = implementation_offsets(panel)
    _write_text(out / "implementation_offsets.csv",
                _csv_text(["policy", "country", "offset_days"], offsets))
    mob = mobility_by_period(panel)
    _write_text(out / "mobility_by_period.csv",
                _csv_text(["category", "country", "date", "period", "deviation_pp"], mob))

    stats = []
    for p in POLICIES:
        vals = np.array([o for pol, _, o in offsets if pol == p.value], dtype=float)
        stats.append([p.value, vals.size, *(_describe(vals))])
    _write_text(out / "implementation_offsets_summary.csv",
                _csv_text(["policy", "n", "mean", "sd", "min", "median", "max"], stats))
    stats = []
    for cat in CATEGORIES:
        for period in ("before", "after"):
            vals = np.array([v for c, _, _, per, v in mob if c == cat.value and per == period])
            stats.append([cat.value, period, vals.size, *(_describe(vals))])
    _write_text(out / "mobility_summary.csv",
                _csv_text(["category", "period", "n", "mean", "sd", "min", "median", "max"], stats))
    return 0


def _describe(vals: np.ndarray) -> list[Any]:
    if vals.size == 0:
        return [None] * 5
    sd = float(vals.std(ddof=1)) if vals.size > 1 else None
    return [float(vals.mean()), sd, float(vals.min()), float(np.median(vals)), float(vals.max())]


def run_simulate(manifest: RunManifest, out_dir) -> int:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_text(out / MANIFEST_NAME, manifest.dumps())
    cfg = config_from_dict(manifest.simulation)
    panel, truth = simulate(cfg)
    write_sources(out, panel.schedules.values(), panel.epi.values(), panel.mobility.values(),
                  panel.covariates.values())
    _write_text(out / "truth.json", json.dumps(truth.to_dict(), indent=2) + "\n")
    if isinstance(truth, SirTruth):
        st = truth.states
        _write_text(out / "sir_states.csv", _csv_text(list(st.columns), st.itertuples(index=False)))
    return 0


def run_manifest(manifest: RunManifest, out_dir, jobs: int = 1) -> int:
    if manifest.command == "estimate":
        return run_estimate(manifest, out_dir, jobs=jobs)
    if manifest.command == "summary":
        return run_summary(manifest, out_dir)
    return run_simulate(manifest, out_dir)

