"""Outcome and control transformations."""

from __future__ import annotations

import enum
import math
from typing import Optional, Sequence

import numpy as np

from .panel import MobilityCategory, Panel, PanelRow


class OutcomeKind(enum.Enum):
    CASES_IHS_MA3 = "cases_ihs_ma3"
    CASES_IHS = "cases_ihs"
    RETAIL_RECREATION = "retail_recreation"
    GROCERY_PHARMACY = "grocery_pharmacy"
    PARKS = "parks"
    TRANSIT_STATIONS = "transit_stations"
    WORKPLACES = "workplaces"
    RESIDENTIAL = "residential"

    @property
    def category(self) -> Optional[MobilityCategory]:
        """Mobility category for deviation outcomes, None for case outcomes."""
        if self in (OutcomeKind.CASES_IHS_MA3, OutcomeKind.CASES_IHS):
            return None
        return MobilityCategory(self.value)

    @classmethod
    def parse(cls, name: str) -> "OutcomeKind":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ValueError(f"unknown outcome {name!r}") from None


# The batch set: smoothed cases plus the six mobility categories.
MAIN_OUTCOMES = (OutcomeKind.CASES_IHS_MA3,) + tuple(
    k for k in OutcomeKind if k.category is not None)

CASES_WINDOW = 3


def moving_average(series: Sequence[float], window: int) -> np.ndarray:
    """Trailing mean; the first ``window - 1`` entries average what is available."""
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    x = np.asarray(series, dtype=float)
    if x.size == 0:
        raise ValueError("empty series")
    csum = np.concatenate(([0.0], np.cumsum(x)))
    idx = np.arange(1, x.size + 1)
    lo = np.maximum(idx - window, 0)
    return (csum[idx] - csum[lo]) / (idx - lo)


def ihs(x):
    """Inverse hyperbolic sine, ln(x + sqrt(x^2 + 1)). Accepts scalars or arrays."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("ihs requires finite input")
    out = np.arcsinh(arr)
    return float(out) if out.ndim == 0 else out


def log_prevalence_lag(row: PanelRow) -> Optional[float]:
    if row.t == 0 or row.cumulative_lag1 is None or row.cumulative_lag1 < 1:
        return None
    return math.log(row.cumulative_lag1)


def outcome_value(row: PanelRow, kind: OutcomeKind,
                  smoothed_cases: Optional[Sequence[float]] = None) -> Optional[float]:
    """Outcome for one row. ``smoothed_cases`` is the country's in-panel
    3-day trailing mean indexed by ``t``; needed only for CASES_IHS_MA3."""
    if kind is OutcomeKind.CASES_IHS_MA3:
        if smoothed_cases is None:
            raise ValueError("smoothed_cases required for the smoothed case outcome")
        return ihs(float(smoothed_cases[row.t]))
    if kind is OutcomeKind.CASES_IHS:
        return ihs(float(row.new_cases))
    return row.mobility.get(kind.category)


def smoothed_cases(panel: Panel, country: str, window: int = CASES_WINDOW) -> np.ndarray:
    counts = panel.frame.loc[panel.frame["country"] == country, "new_cases"].to_numpy()
    return moving_average(counts, window)


def log_prevalence_array(panel: Panel) -> np.ndarray:
    """Column form of ``log_prevalence_lag``; NaN where undefined."""
    lag = panel.frame["cumulative_lag1"].to_numpy()
    t = panel.frame["t"].to_numpy()
    ok = (lag >= 1) & (t > 0)
    out = np.full(len(lag), np.nan)
    out[ok] = np.log(lag[ok])
    return out


def outcome_array(panel: Panel, kind: OutcomeKind) -> np.ndarray:
    """Column form of ``outcome_value``; NaN where absent."""
    frame = panel.frame
    if kind.category is not None:
        return frame[kind.category.value].to_numpy(dtype=float, copy=True)
    cases = frame["new_cases"].to_numpy(dtype=float)
    if kind is OutcomeKind.CASES_IHS:
        return np.arcsinh(cases)
    out = np.empty(len(frame))
    countries = frame["country"].to_numpy()
    # frame is grouped by country in contiguous blocks
    bounds = np.flatnonzero(countries[1:] != countries[:-1]) + 1
    for lo, hi in zip(np.r_[0, bounds], np.r_[bounds, len(frame)]):
        if hi > lo:
            out[lo:hi] = np.arcsinh(moving_average(cases[lo:hi], CASES_WINDOW))
    return out
