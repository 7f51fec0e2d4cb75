"""Core data model: policies, epidemiological and mobility series, covariates,
and the country-by-date panel aligned to days since first confirmed case."""

from __future__ import annotations

import datetime as dt
import enum
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional

import numpy as np
import pandas as pd

MAX_INTENSITY = 6
MOBILITY_BAND = (-100.0, 500.0)


class PanelError(ValueError):
    """Raised when source data cannot be assembled into a panel."""

    def __init__(self, message: str, key: object = None):
        super().__init__(message)
        self.key = key


class PolicyKind(enum.Enum):
    TRAVEL_CONTROLS = "travel_controls"
    TRANSPORT_CLOSURE = "transport_closure"
    EVENTS_CANCELLATION = "events_cancellation"
    GATHERINGS_RESTRICTIONS = "gatherings_restrictions"
    SCHOOL_CLOSURE = "school_closure"
    WORKPLACE_CLOSURE = "workplace_closure"
    STAY_AT_HOME = "stay_at_home"
    INTERNAL_MOVEMENT = "internal_movement"

    @classmethod
    def parse(cls, name: str) -> "PolicyKind":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ValueError(f"unknown policy {name!r}") from None


class MobilityCategory(enum.Enum):
    RETAIL_RECREATION = "retail_recreation"
    GROCERY_PHARMACY = "grocery_pharmacy"
    PARKS = "parks"
    TRANSIT_STATIONS = "transit_stations"
    WORKPLACES = "workplaces"
    RESIDENTIAL = "residential"

    @classmethod
    def parse(cls, name: str) -> "MobilityCategory":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ValueError(f"unknown mobility category {name!r}") from None


class Region(enum.Enum):
    EUROPE = "Europe"
    ASIA = "Asia"
    MIDDLE_EAST = "MiddleEast"
    NORTH_AMERICA = "NorthAmerica"
    SOUTH_AMERICA = "SouthAmerica"
    OCEANIA = "Oceania"
    AFRICA = "Africa"

    @classmethod
    def parse(cls, name: str) -> "Region":
        key = "".join(name.split()).lower()
        for member in cls:
            if member.value.lower() == key:
                return member
        raise ValueError(f"unknown region {name!r}")


POLICIES: tuple[PolicyKind, ...] = tuple(PolicyKind)
CATEGORIES: tuple[MobilityCategory, ...] = tuple(MobilityCategory)
# Dummy-coding order; the first entry is the omitted level.
REGION_ORDER: tuple[Region, ...] = tuple(sorted(Region, key=lambda r: r.value))
COVARIATE_NAMES = ("ln_gdp_pc", "ln_pop", "ln_density", "urbanization")


@dataclass(frozen=True)
class PolicySchedule:
    """Daily intensity path of one policy in one country.

    Stored as a step function: ``changes`` is a date-sorted tuple of
    ``(date, level)`` and each level holds until the next change. Days before
    the first change are at level 0.
    """

    country: str
    policy: PolicyKind
    changes: tuple[tuple[dt.date, int], ...] = ()

    def __post_init__(self):
        days = [d for d, _ in self.changes]
        if len(days) != len(set(days)):
            raise PanelError(f"duplicate date in schedule {self.country}/{self.policy.value}",
                             key=(self.country, self.policy.value))
        cleaned = []
        last = 0
        for day, level in sorted(self.changes):
            if isinstance(level, bool) or int(level) != level:
                raise PanelError(f"non-integer intensity {level!r}", key=(self.country, day))
            level = int(level)
            if not 0 <= level <= MAX_INTENSITY:
                raise PanelError(f"intensity {level} outside 0..{MAX_INTENSITY}", key=(self.country, day))
            if level != last:
                cleaned.append((day, level))
                last = level
        object.__setattr__(self, "changes", tuple(cleaned))

    @classmethod
    def from_daily(cls, country: str, policy: PolicyKind,
                   levels: Mapping[dt.date, int]) -> "PolicySchedule":
        """Build from an explicit per-day map; unlisted days are 0."""
        changes = []
        prev_day, prev_level = None, 0
        for day in sorted(levels):
            level = levels[day]
            if prev_day is not None and (day - prev_day).days > 1 and prev_level != 0:
                changes.append((prev_day + dt.timedelta(days=1), 0))
                prev_level = 0
            if level != prev_level:
                changes.append((day, level))
            prev_day, prev_level = day, level
        if prev_day is not None and prev_level != 0:
            changes.append((prev_day + dt.timedelta(days=1), 0))
        return cls(country, policy, tuple(changes))

    @property
    def implementation_date(self) -> Optional[dt.date]:
        for day, level in self.changes:
            if level > 0:
                return day
        return None

    def level_on(self, day: dt.date) -> int:
        level = 0
        for change_day, change_level in self.changes:
            if change_day > day:
                break
            level = change_level
        return level

    def levels(self, days: np.ndarray) -> np.ndarray:
        """Vectorised ``level_on`` over an array of ``datetime64[D]``."""
        days = np.asarray(days, dtype="datetime64[D]")
        if not self.changes:
            return np.zeros(days.shape, dtype=np.int64)
        cdays = np.array([d for d, _ in self.changes], dtype="datetime64[D]")
        clevels = np.array([0] + [lv for _, lv in self.changes], dtype=np.int64)
        return clevels[np.searchsorted(cdays, days, side="right")]


@dataclass(frozen=True)
class EpiSeries:
    country: str
    new_cases: Mapping[dt.date, int]
    cumulative: Mapping[dt.date, int]

    @classmethod
    def from_new_cases(cls, country: str, start: dt.date, counts: Iterable[int]) -> "EpiSeries":
        new, cum = {}, {}
        total = 0
        for i, n in enumerate(counts):
            day = start + dt.timedelta(days=i)
            n = int(n)
            total += n
            new[day] = n
            cum[day] = total
        return cls(country, new, cum)

    @property
    def first_case_date(self) -> Optional[dt.date]:
        for day in sorted(self.cumulative):
            if self.cumulative[day] >= 1:
                return day
        return None

    @property
    def last_date(self) -> Optional[dt.date]:
        return max(self.cumulative) if self.cumulative else None

    def validate(self) -> None:
        if set(self.new_cases) != set(self.cumulative):
            raise PanelError(f"{self.country}: new_cases and cumulative cover different dates",
                             key=self.country)
        prev_day, prev_cum = None, None
        for day in sorted(self.cumulative):
            cum, new = self.cumulative[day], self.new_cases[day]
            if cum < 0 or new < 0:
                raise PanelError(f"{self.country} {day}: negative case count", key=(self.country, day))
            if prev_day is not None:
                if (day - prev_day).days != 1:
                    raise PanelError(f"{self.country}: case series has a gap before {day}",
                                     key=(self.country, day))
                if cum < prev_cum:
                    raise PanelError(f"{self.country} {day}: cumulative cases decrease "
                                     f"({prev_cum} -> {cum})", key=(self.country, day))
                if cum - prev_cum != new:
                    raise PanelError(f"{self.country} {day}: cumulative increment {cum - prev_cum} "
                                     f"!= new cases {new}", key=(self.country, day))
            prev_day, prev_cum = day, cum


@dataclass(frozen=True)
class MobilitySeries:
    """Percentage-point deviations per place category; absent days are missing."""

    country: str
    values: Mapping[MobilityCategory, Mapping[dt.date, float]]

    def validate(self) -> None:
        lo, hi = MOBILITY_BAND
        for cat, series in self.values.items():
            for day, v in series.items():
                if not (np.isfinite(v) and lo <= v <= hi):
                    raise PanelError(f"{self.country} {day} {cat.value}: deviation {v} outside "
                                     f"[{lo}, {hi}]", key=(self.country, day, cat.value))


@dataclass(frozen=True)
class CountryCovariates:
    country: str
    gdp_per_capita: float
    population: float
    population_density: float
    urbanization_rate: float
    region: Region

    def __post_init__(self):
        for name in ("gdp_per_capita", "population", "population_density"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise PanelError(f"{self.country}: {name} must be positive, got {v}", key=self.country)
        if not (np.isfinite(self.urbanization_rate) and 0 <= self.urbanization_rate <= 100):
            raise PanelError(f"{self.country}: urbanization_rate {self.urbanization_rate} "
                             f"outside [0, 100]", key=self.country)
        if not isinstance(self.region, Region):
            raise PanelError(f"{self.country}: region must be a Region", key=self.country)

    def transformed(self) -> tuple[float, float, float, float]:
        """Covariates on the regression scale (logs of the magnitudes)."""
        return (float(np.log(self.gdp_per_capita)), float(np.log(self.population)),
                float(np.log(self.population_density)), float(self.urbanization_rate))


@dataclass(frozen=True)
class PanelRow:
    country: str
    calendar_date: dt.date
    t: int
    day_of_week: int
    new_cases: int
    cumulative_lag1: Optional[int]
    intensity: Mapping[PolicyKind, int]
    mobility: Mapping[MobilityCategory, Optional[float]]
    covariates: CountryCovariates


@dataclass(frozen=True, eq=False)
class Panel:
    """Rectangular country-by-date table.

    ``frame`` holds one row per (country, date) from each country's first case
    to its last reported date, ordered by country then date. Columns: country,
    date (datetime64), t, dow (Monday = 0), new_cases, cumulative,
    cumulative_lag1 (-1 when undefined), one int column per policy value and
    one float column per mobility category value (NaN when missing).
    """

    frame: pd.DataFrame
    schedules: Mapping[tuple[str, PolicyKind], PolicySchedule]
    epi: Mapping[str, EpiSeries]
    mobility: Mapping[str, MobilitySeries]
    covariates: Mapping[str, CountryCovariates]
    first_case: Mapping[str, dt.date] = field(default_factory=dict)

    @property
    def countries(self) -> list[str]:
        return list(self.first_case)

    def date_range(self, country: str) -> tuple[dt.date, dt.date]:
        return self.first_case[country], self.epi[country].last_date

    def implementation_date(self, country: str, policy: PolicyKind) -> Optional[dt.date]:
        sched = self.schedules.get((country, policy))
        return sched.implementation_date if sched else None

    def level_on(self, country: str, policy: PolicyKind, day: dt.date) -> int:
        sched = self.schedules.get((country, policy))
        return sched.level_on(day) if sched else 0

    def intensity_matrix(self) -> np.ndarray:
        return self.frame[[p.value for p in POLICIES]].to_numpy()

    def __len__(self) -> int:
        return len(self.frame)

    def row(self, i: int) -> PanelRow:
        r = self.frame.iloc[i]
        lag = int(r["cumulative_lag1"])
        return PanelRow(
            country=r["country"],
            calendar_date=r["date"].date(),
            t=int(r["t"]),
            day_of_week=int(r["dow"]),
            new_cases=int(r["new_cases"]),
            cumulative_lag1=None if lag < 0 else lag,
            intensity={p: int(r[p.value]) for p in POLICIES},
            mobility={c: (None if np.isnan(r[c.value]) else float(r[c.value])) for c in CATEGORIES},
            covariates=self.covariates[r["country"]],
        )

    def iter_rows(self) -> Iterator[PanelRow]:
        for i in range(len(self.frame)):
            yield self.row(i)


def build_panel(schedules: Iterable[PolicySchedule], epi: Iterable[EpiSeries],
                mobility: Iterable[MobilitySeries],
                covariates: Iterable[CountryCovariates]) -> Panel:
    sched_map: dict[tuple[str, PolicyKind], PolicySchedule] = {}
    for s in schedules:
        key = (s.country, s.policy)
        if key in sched_map:
            raise PanelError(f"duplicate schedule for {s.country}/{s.policy.value}", key=key)
        sched_map[key] = s
    epi_map = _unique(epi, "case series")
    mob_map = _unique(mobility, "mobility series")
    cov_map = _unique(covariates, "covariates")
    for country, series in epi_map.items():
        if country not in cov_map:
            raise PanelError(f"{country}: case data without covariates", key=country)
        series.validate()
    for series in mob_map.values():
        series.validate()

    pieces = []
    first_case = {}
    for country in sorted(epi_map):
        series = epi_map[country]
        start = series.first_case_date
        if start is None:
            continue
        first_case[country] = start
        days = np.arange(np.datetime64(start), np.datetime64(series.last_date) + 1,
                         dtype="datetime64[D]")
        n = len(days)
        new = np.array([series.new_cases.get(d.item(), 0) for d in days], dtype=np.int64)
        cum = np.array([series.cumulative.get(d.item(), 0) for d in days], dtype=np.int64)
        lag = np.empty(n, dtype=np.int64)
        lag[0] = -1
        lag[1:] = cum[:-1]
        cols = {
            "country": np.full(n, country, dtype=object),
            "date": days,
            "t": np.arange(n, dtype=np.int64),
            # 1970-01-01 was a Thursday
            "dow": ((days.astype(np.int64) + 3) % 7).astype(np.int64),
            "new_cases": new,
            "cumulative": cum,
            "cumulative_lag1": lag,
        }
        for p in POLICIES:
            s = sched_map.get((country, p))
            cols[p.value] = s.levels(days) if s else np.zeros(n, dtype=np.int64)
        mob = mob_map.get(country)
        for c in CATEGORIES:
            vals = mob.values.get(c, {}) if mob else {}
            cols[c.value] = np.array([vals.get(d.item(), np.nan) for d in days], dtype=float)
        pieces.append(pd.DataFrame(cols))
    if pieces:
        frame = pd.concat(pieces, ignore_index=True)
    else:
        frame = pd.DataFrame({k: pd.Series(dtype=t) for k, t in _EMPTY_DTYPES().items()})
    frame["date"] = frame["date"].astype("datetime64[ns]")
    return Panel(frame, sched_map, epi_map, mob_map, cov_map, first_case)


def _EMPTY_DTYPES() -> dict[str, str]:
    d = {"country": "object", "date": "datetime64[ns]", "t": "int64", "dow": "int64",
         "new_cases": "int64", "cumulative": "int64", "cumulative_lag1": "int64"}
    d.update({p.value: "int64" for p in POLICIES})
    d.update({c.value: "float64" for c in CATEGORIES})
    return d


def _unique(items, what):
    out = {}
    for item in items:
        if item.country in out:
            raise PanelError(f"duplicate {what} for {item.country}", key=item.country)
        out[item.country] = item
    return out


def event_time(panel: Panel, country: str, policy: PolicyKind, day: dt.date) -> Optional[int]:
    """Days since the policy's implementation in ``country``; None if never implemented."""
    impl = panel.implementation_date(country, policy)
    if impl is None:
        return None
    return (day - impl).days


def concurrent_mean_intensity(panel: Panel, country: str, policy: PolicyKind, day: dt.date) -> float:
    """Mean level of the other policies active on ``day``; 0.0 when none is."""
    levels = [panel.level_on(country, p, day) for p in POLICIES if p is not policy]
    active = [lv for lv in levels if lv > 0]
    return sum(active) / len(active) if active else 0.0


def concurrent_mean_array(intensities: np.ndarray, policy_index: int) -> np.ndarray:
    """Row-wise ``concurrent_mean_intensity`` for an (n, 8) level matrix."""
    others = np.delete(intensities, policy_index, axis=1).astype(float)
    active = others > 0
    count = active.sum(axis=1)
    total = np.where(active, others, 0.0).sum(axis=1)
    return np.divide(total, count, out=np.zeros(len(others)), where=count > 0)
