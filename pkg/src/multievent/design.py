"""Response vector and regressor matrix for one (policy, outcome, variant)."""

from __future__ import annotations

import datetime as dt
import enum
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .panel import (COVARIATE_NAMES, POLICIES, REGION_ORDER, Panel, PolicyKind,
                    concurrent_mean_array)
from .transforms import OutcomeKind, log_prevalence_array, outcome_array


class DesignError(ValueError):
    pass


class Variant(enum.Enum):
    SINGLE_EVENT_DUMMY = "eq1"
    MULTI_EVENT_DUMMY = "eq2"
    SINGLE_EVENT_INTENSITY = "eq3-single"
    MULTI_EVENT_INTENSITY = "eq3"

    @property
    def multi(self) -> bool:
        return self in (Variant.MULTI_EVENT_DUMMY, Variant.MULTI_EVENT_INTENSITY)

    @property
    def intensity(self) -> bool:
        return self in (Variant.SINGLE_EVENT_INTENSITY, Variant.MULTI_EVENT_INTENSITY)

    @classmethod
    def parse(cls, name: str) -> "Variant":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ValueError(f"unknown variant {name!r}; expected one of "
                             f"{', '.join(v.value for v in cls)}") from None


@dataclass(frozen=True)
class Controls:
    time: bool = True
    dow: bool = True
    region: bool = True
    prevalence: bool = True
    covariates: bool = True


CLUSTER_CHOICES = ("country", "row")


@dataclass(frozen=True)
class EstimationSpec:
    policy: PolicyKind
    outcome: OutcomeKind
    window_lo: int = -20
    window_hi: int = 35
    reference_event_time: int = -20
    variant: Variant = Variant.MULTI_EVENT_INTENSITY
    controls: Controls = field(default_factory=Controls)
    cluster_by: str = "country"

    def __post_init__(self):
        if not self.window_lo < self.window_hi:
            raise DesignError(f"window_lo {self.window_lo} must be below window_hi {self.window_hi}")
        if not self.window_lo <= self.reference_event_time <= self.window_hi:
            raise DesignError(f"reference event time {self.reference_event_time} outside "
                              f"[{self.window_lo}, {self.window_hi}]")
        if self.cluster_by not in CLUSTER_CHOICES:
            raise DesignError(f"cluster_by must be one of {CLUSTER_CHOICES}")

    @property
    def event_times(self) -> list[int]:
        return [j for j in range(self.window_lo, self.window_hi + 1)
                if j != self.reference_event_time]

    @property
    def window(self) -> range:
        return range(self.window_lo, self.window_hi + 1)

    @property
    def name(self) -> str:
        return f"{self.policy.value}__{self.outcome.value}__{self.variant.value}"


@dataclass(frozen=True, eq=False)
class DesignProblem:
    y: np.ndarray
    X: np.ndarray
    column_labels: list[str]
    clusters: np.ndarray
    row_keys: list[tuple[str, dt.date]]

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def subset(self, rows) -> "DesignProblem":
        rows = np.asarray(rows)
        return DesignProblem(self.y[rows], self.X[rows], list(self.column_labels),
                             self.clusters[rows], [self.row_keys[i] for i in rows])


def event_label(j: int) -> str:
    return f"event[j={j}]"


def conc_label(j: int) -> str:
    return f"conc[j={j}]"


def _event_times(panel: Panel, policy: PolicyKind) -> tuple[np.ndarray, np.ndarray]:
    """Per-row event time (0 where undefined) and a defined-mask."""
    frame = panel.frame
    countries = frame["country"].to_numpy()
    days = frame["date"].to_numpy().astype("datetime64[D]").astype(np.int64)
    impl = np.zeros(len(frame), dtype=np.int64)
    has = np.zeros(len(frame), dtype=bool)
    for country in panel.countries:
        d = panel.implementation_date(country, policy)
        if d is None:
            continue
        mask = countries == country
        impl[mask] = np.datetime64(d, "D").astype(np.int64)
        has[mask] = True
    return np.where(has, days - impl, 0), has


def _implementation_levels(panel: Panel, policy: PolicyKind) -> np.ndarray:
    countries = panel.frame["country"].to_numpy()
    out = np.zeros(len(countries), dtype=np.int64)
    for country in panel.countries:
        d = panel.implementation_date(country, policy)
        if d is not None:
            out[countries == country] = panel.level_on(country, policy, d)
    return out


def s_pi(panel: Panel, country: str, policy: PolicyKind, day: dt.date,
         spec: EstimationSpec) -> float:
    """Intensity weight of the policy's event column for one (country, date).

    On and after implementation this is the level in force that day; before
    implementation it is the level set on the implementation day, so the
    anticipation columns are not identically zero. Outside the window it is 0.
    """
    impl = panel.implementation_date(country, policy)
    if impl is None:
        return 0.0
    j = (day - impl).days
    if not spec.window_lo <= j <= spec.window_hi:
        return 0.0
    return float(panel.level_on(country, policy, day if j >= 0 else impl))


def build_design(panel: Panel, spec: EstimationSpec) -> DesignProblem:
    frame = panel.frame
    y_all = outcome_array(panel, spec.outcome)
    lnprev_all = log_prevalence_array(panel)
    keep = ~np.isnan(y_all) & ~np.isnan(lnprev_all)
    if not keep.any():
        raise DesignError(f"empty estimation sample after filtering: outcome "
                          f"{spec.outcome.value} defined and lagged prevalence >= 1 case "
                          f"(t > 0); panel rows: {len(frame)}")
    rows = np.flatnonzero(keep)
    sub = frame.iloc[rows]
    n = len(rows)

    ev_all, has_all = _event_times(panel, spec.policy)
    ev, has = ev_all[rows], has_all[rows]
    in_window = has & (ev >= spec.window_lo) & (ev <= spec.window_hi)
    if not in_window.any():
        raise DesignError(f"no observation of {spec.policy.value} at an event time in "
                          f"[{spec.window_lo}, {spec.window_hi}]")

    levels = sub[spec.policy.value].to_numpy()
    if spec.variant.intensity:
        impl_level = _implementation_levels(panel, spec.policy)[rows]
        weight = np.where(ev >= 0, levels, impl_level).astype(float)
    else:
        weight = np.ones(n)
    weight = np.where(in_window, weight, 0.0)

    blocks: list[np.ndarray] = []
    labels: list[str] = []

    event_times = spec.event_times
    col_of = {j: k for k, j in enumerate(event_times)}
    ev_block = np.zeros((n, len(event_times)))
    hit = in_window & (ev != spec.reference_event_time)
    ev_block[np.flatnonzero(hit), [col_of[j] for j in ev[hit]]] = weight[hit]
    blocks.append(ev_block)
    labels += [event_label(j) for j in event_times]

    if spec.variant.multi:
        pidx = POLICIES.index(spec.policy)
        inten = sub[[p.value for p in POLICIES]].to_numpy()
        if spec.variant.intensity:
            conc = concurrent_mean_array(inten, pidx)
        else:
            conc = (np.delete(inten, pidx, axis=1) > 0).any(axis=1).astype(float)
        window = list(spec.window)
        conc_block = np.zeros((n, len(window)))
        conc_block[np.flatnonzero(in_window), ev[in_window] - spec.window_lo] = conc[in_window]
        blocks.append(conc_block)
        labels += [conc_label(j) for j in window]

    ctl = spec.controls
    if ctl.time:
        block, names = _dummies(sub["t"].to_numpy())
        blocks.append(block)
        labels += [f"time[t={v}]" for v in names]
    if ctl.dow:
        block, names = _dummies(sub["dow"].to_numpy())
        blocks.append(block)
        labels += [f"dow[{v}]" for v in names]
    if ctl.region:
        order = {r.value: k for k, r in enumerate(REGION_ORDER)}
        codes = np.array([order[panel.covariates[c].region.value] for c in sub["country"]])
        block, names = _dummies(codes)
        blocks.append(block)
        labels += [f"region[{REGION_ORDER[v].value}]" for v in names]
    if ctl.prevalence:
        blocks.append(lnprev_all[rows][:, None])
        labels.append("lnprev")
    if ctl.covariates:
        cov_rows = {c: panel.covariates[c].transformed() for c in panel.countries}
        blocks.append(np.array([cov_rows[c] for c in sub["country"]], dtype=float))
        labels += [f"cov[{name}]" for name in COVARIATE_NAMES]
    blocks.append(np.ones((n, 1)))
    labels.append("intercept")

    X = np.hstack(blocks)
    countries = sub["country"].to_numpy()
    if spec.cluster_by == "country":
        clusters = countries
    else:
        clusters = np.arange(n)
    row_keys = list(zip(countries.tolist(), [d.date() for d in sub["date"]]))
    return DesignProblem(y_all[rows], X, labels, clusters, row_keys)


def _dummies(values: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Indicator columns for every level except the smallest present one."""
    levels = np.unique(values)[1:]
    if levels.size == 0:
        return np.zeros((len(values), 0)), []
    block = (values[:, None] == levels[None, :]).astype(float)
    return block, levels.tolist()


def design_frame(problem: DesignProblem) -> pd.DataFrame:
    """The regressor matrix as a labelled frame indexed by (country, date)."""
    index = pd.MultiIndex.from_tuples(problem.row_keys, names=["country", "date"])
    return pd.DataFrame(problem.X, index=index, columns=problem.column_labels)
