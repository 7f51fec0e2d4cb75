"""Reading and writing the four canonical comma-separated input files.

Formats (UTF-8, header row mandatory, ISO-8601 dates, ISO 3166 alpha-3 codes):

    policies.csv    country_iso3,policy,date,intensity
    cases.csv       country_iso3,date,new_cases
    mobility.csv    country_iso3,date,category,deviation_pp
    covariates.csv  country_iso3,region,gdp_per_capita,population,population_density,urbanization_rate

Policy rows record changes: a listed level holds until the next listed date
for the same (country, policy) and persists after the last one.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
import os
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Union

import pycountry

from .panel import (CATEGORIES, MOBILITY_BAND, POLICIES, CountryCovariates, EpiSeries,
                    MobilityCategory, MobilitySeries, Panel, PanelError, PolicyKind,
                    PolicySchedule, Region, build_panel)

PathLike = Union[str, os.PathLike]

POLICY_HEADER = ["country_iso3", "policy", "date", "intensity"]
CASES_HEADER = ["country_iso3", "date", "new_cases"]
MOBILITY_HEADER = ["country_iso3", "date", "category", "deviation_pp"]
COVARIATES_HEADER = ["country_iso3", "region", "gdp_per_capita", "population",
                     "population_density", "urbanization_rate"]

FILE_NAMES = {"policies": "policies.csv", "cases": "cases.csv",
              "mobility": "mobility.csv", "covariates": "covariates.csv"}

_ISO3 = frozenset(c.alpha_3 for c in pycountry.countries)


class IngestError(ValueError):
    def __init__(self, path, line: Optional[int], message: str):
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")
        self.path = str(path)
        self.line = line


def _rows(path: PathLike, header: list[str]):
    """Yield (line_number, record) with the header checked."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            got = next(reader)
        except StopIteration:
            raise IngestError(path, 1, "missing header row") from None
        if [h.strip() for h in got] != header:
            raise IngestError(path, 1, f"expected header {','.join(header)}, got {','.join(got)}")
        for record in reader:
            if not record or all(not f.strip() for f in record):
                continue
            if len(record) != len(header):
                raise IngestError(path, reader.line_num,
                                  f"expected {len(header)} fields, got {len(record)}")
            yield reader.line_num, [f.strip() for f in record]


def _country(path, line, code: str) -> str:
    if code not in _ISO3:
        raise IngestError(path, line, f"{code!r} is not an ISO 3166 alpha-3 country code")
    return code


def _date(path, line, text: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        raise IngestError(path, line, f"unparseable date {text!r}") from None


def _int(path, line, text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise IngestError(path, line, f"{what} {text!r} is not an integer") from None


def _float(path, line, text: str, what: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise IngestError(path, line, f"{what} {text!r} is not a number") from None
    if not math.isfinite(v):
        raise IngestError(path, line, f"{what} must be finite")
    return v


def parse_policies(path: PathLike) -> list[PolicySchedule]:
    changes: dict[tuple[str, PolicyKind], dict[dt.date, int]] = defaultdict(dict)
    for line, (code, name, day, level) in _rows(path, POLICY_HEADER):
        country = _country(path, line, code)
        try:
            policy = PolicyKind.parse(name)
        except ValueError as exc:
            raise IngestError(path, line, str(exc)) from None
        d = _date(path, line, day)
        lv = _int(path, line, level, "intensity")
        if not 0 <= lv <= 6:
            raise IngestError(path, line, f"intensity {lv} outside 0..6")
        if d in changes[(country, policy)]:
            raise IngestError(path, line, f"duplicate entry for {country}/{policy.value} on {d}")
        changes[(country, policy)][d] = lv
    return [PolicySchedule(c, p, tuple(sorted(ch.items())))
            for (c, p), ch in sorted(changes.items(), key=lambda kv: (kv[0][0], POLICIES.index(kv[0][1])))]


def parse_cases(path: PathLike) -> list[EpiSeries]:
    counts: dict[str, dict[dt.date, int]] = defaultdict(dict)
    for line, (code, day, value) in _rows(path, CASES_HEADER):
        country = _country(path, line, code)
        d = _date(path, line, day)
        n = _int(path, line, value, "new_cases")
        if n < 0:
            raise IngestError(path, line, f"negative case count {n}")
        if d in counts[country]:
            raise IngestError(path, line, f"duplicate entry for {country} on {d}")
        counts[country][d] = n
    out = []
    for country in sorted(counts):
        by_day = counts[country]
        start, end = min(by_day), max(by_day)
        span = (end - start).days + 1
        series = [by_day.get(start + dt.timedelta(days=i), 0) for i in range(span)]
        out.append(EpiSeries.from_new_cases(country, start, series))
    return out


def parse_mobility(path: PathLike) -> list[MobilitySeries]:
    values: dict[str, dict[MobilityCategory, dict[dt.date, float]]] = defaultdict(dict)
    lo, hi = MOBILITY_BAND
    for line, (code, day, cat, dev) in _rows(path, MOBILITY_HEADER):
        country = _country(path, line, code)
        d = _date(path, line, day)
        try:
            category = MobilityCategory.parse(cat)
        except ValueError as exc:
            raise IngestError(path, line, str(exc)) from None
        v = _float(path, line, dev, "deviation_pp")
        if not lo <= v <= hi:
            raise IngestError(path, line, f"deviation {v} outside [{lo}, {hi}]")
        series = values[country].setdefault(category, {})
        if d in series:
            raise IngestError(path, line, f"duplicate entry for {country}/{category.value} on {d}")
        series[d] = v
    return [MobilitySeries(c, {cat: dict(sorted(values[c][cat].items()))
                               for cat in CATEGORIES if cat in values[c]})
            for c in sorted(values)]


def parse_covariates(path: PathLike) -> list[CountryCovariates]:
    out = {}
    for line, (code, region, gdp, pop, dens, urb) in _rows(path, COVARIATES_HEADER):
        country = _country(path, line, code)
        if country in out:
            raise IngestError(path, line, f"duplicate entry for {country}")
        try:
            reg = Region.parse(region)
        except ValueError as exc:
            raise IngestError(path, line, str(exc)) from None
        try:
            out[country] = CountryCovariates(
                country, _float(path, line, gdp, "gdp_per_capita"),
                _float(path, line, pop, "population"),
                _float(path, line, dens, "population_density"),
                _float(path, line, urb, "urbanization_rate"), reg)
        except PanelError as exc:
            raise IngestError(path, line, str(exc)) from None
    return [out[c] for c in sorted(out)]


@dataclass
class FileReport:
    path: str
    rows: int
    records: int
    countries: list[str] = field(default_factory=list)


@dataclass
class CanonicalFileSet:
    policies: FileReport
    cases: FileReport
    mobility: FileReport
    covariates: FileReport

    def to_dict(self) -> dict:
        return {k: vars(getattr(self, k)) for k in FILE_NAMES}


def _count_rows(path: PathLike) -> int:
    with open(path, encoding="utf-8") as fh:
        return max(sum(1 for line in fh if line.strip()) - 1, 0)


def resolve_paths(data_dir: Optional[PathLike] = None, **paths: Optional[PathLike]) -> dict[str, Path]:
    """Explicit paths win; the rest default to the canonical names in ``data_dir``."""
    out = {}
    for key, name in FILE_NAMES.items():
        p = paths.get(key)
        if p is None:
            if data_dir is None:
                raise ValueError(f"no path for the {key} file")
            p = Path(data_dir) / name
        out[key] = Path(p)
    return out


def load_sources(paths: dict[str, PathLike]):
    """Parse all four files. Returns (file set, schedules, epi, mobility, covariates)."""
    schedules = parse_policies(paths["policies"])
    epi = parse_cases(paths["cases"])
    mobility = parse_mobility(paths["mobility"])
    covariates = parse_covariates(paths["covariates"])
    fileset = CanonicalFileSet(
        FileReport(str(paths["policies"]), _count_rows(paths["policies"]), len(schedules),
                   sorted({s.country for s in schedules})),
        FileReport(str(paths["cases"]), _count_rows(paths["cases"]), len(epi),
                   [e.country for e in epi]),
        FileReport(str(paths["mobility"]), _count_rows(paths["mobility"]), len(mobility),
                   [m.country for m in mobility]),
        FileReport(str(paths["covariates"]), _count_rows(paths["covariates"]), len(covariates),
                   [c.country for c in covariates]),
    )
    return fileset, schedules, epi, mobility, covariates


def load_panel(paths: dict[str, PathLike]) -> tuple[Panel, CanonicalFileSet]:
    fileset, schedules, epi, mobility, covariates = load_sources(paths)
    return build_panel(schedules, epi, mobility, covariates), fileset


def _write(path: Path, header: list[str], rows: Iterable[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_sources(out_dir: PathLike, schedules: Iterable[PolicySchedule],
                  epi: Iterable[EpiSeries], mobility: Iterable[MobilitySeries],
                  covariates: Iterable[CountryCovariates]) -> dict[str, Path]:
    """Write canonical files; floats use repr so re-parsing is bit-exact."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {k: out / name for k, name in FILE_NAMES.items()}
    scheds = sorted(schedules, key=lambda s: (s.country, POLICIES.index(s.policy)))
    _write(paths["policies"], POLICY_HEADER,
           ([s.country, s.policy.value, d.isoformat(), lv] for s in scheds for d, lv in s.changes))
    _write(paths["cases"], CASES_HEADER,
           ([e.country, d.isoformat(), e.new_cases[d]]
            for e in sorted(epi, key=lambda e: e.country) for d in sorted(e.new_cases)))
    _write(paths["mobility"], MOBILITY_HEADER,
           ([m.country, d.isoformat(), cat.value, repr(float(v))]
            for m in sorted(mobility, key=lambda m: m.country)
            for cat in CATEGORIES if cat in m.values
            for d, v in sorted(m.values[cat].items())))
    _write(paths["covariates"], COVARIATES_HEADER,
           ([c.country, c.region.value, repr(c.gdp_per_capita), repr(c.population),
             repr(c.population_density), repr(c.urbanization_rate)]
            for c in sorted(covariates, key=lambda c: c.country)))
    return paths


def export_panel(panel: Panel, out_dir: PathLike) -> dict[str, Path]:
    return write_sources(out_dir, panel.schedules.values(), panel.epi.values(),
                         panel.mobility.values(), panel.covariates.values())
