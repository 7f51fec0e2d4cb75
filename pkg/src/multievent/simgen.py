"""Synthetic panels with known ground truth.

Two generators are provided. ``simulate_linear_panel`` draws policy schedules
and writes an outcome that is exactly the intensity-weighted multiple-events
regression function plus Gaussian noise, so every coefficient is known.
``simulate_sir_panel`` runs a discrete-day SIR epidemic per country whose
transmission rate is cut by active policies, and reports Poisson case counts.

The outcome-generating code here deliberately does not call into
``multievent.design``: it recomputes event times, intensity weights and
concurrent means row by row from the schedules, so recovery tests compare
two independent paths.
"""

from __future__ import annotations

import dataclasses
import datetime as dt
import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
import pandas as pd
import pycountry

from .design import Variant, conc_label, event_label
from .panel import (COVARIATE_NAMES, MOBILITY_BAND, POLICIES, REGION_ORDER,
                    CountryCovariates, EpiSeries, MobilityCategory, MobilitySeries,
                    Panel, PolicyKind, PolicySchedule, Region, build_panel)


class ConfigError(ValueError):
    pass


ISO3_CODES: tuple[str, ...] = tuple(sorted(c.alpha_3 for c in pycountry.countries))


@dataclass(frozen=True)
class PolicyTiming:
    """How one policy's schedule is drawn in every country.

    The implementation day is uniform on [start_lo, start_hi] days after the
    country's day zero, or, when ``anchor`` is set, the anchor policy's
    implementation day plus a uniform lag on [anchor_lag_lo, anchor_lag_hi].
    The first level is uniform on [level_lo, level_hi]; with probability
    ``p_escalate`` the level later moves to a draw on [level, 6].
    """

    start_lo: int = -10
    start_hi: int = 70
    p_never: float = 0.1
    level_lo: int = 1
    level_hi: int = 6
    p_escalate: float = 0.5
    escalate_lag_lo: int = 5
    escalate_lag_hi: int = 25
    anchor: Optional[PolicyKind] = None
    anchor_lag_lo: int = 0
    anchor_lag_hi: int = 10

    def __post_init__(self):
        if not 1 <= self.level_lo <= self.level_hi <= 6:
            raise ConfigError(f"intensity levels must satisfy 1 <= lo <= hi <= 6, got "
                              f"{self.level_lo}..{self.level_hi}")
        if not (0 <= self.p_never <= 1 and 0 <= self.p_escalate <= 1):
            raise ConfigError("probabilities must lie in [0, 1]")
        if self.start_lo > self.start_hi or self.escalate_lag_lo > self.escalate_lag_hi \
                or self.anchor_lag_lo > self.anchor_lag_hi:
            raise ConfigError("empty timing range")
        if self.escalate_lag_lo < 1:
            raise ConfigError("escalation lag must be at least one day")

    @classmethod
    def never(cls) -> "PolicyTiming":
        return cls(p_never=1.0)

    @classmethod
    def from_dict(cls, d: dict) -> "PolicyTiming":
        d = dict(d)
        if d.get("anchor") is not None:
            d["anchor"] = PolicyKind.parse(d["anchor"])
        return cls(**d)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["anchor"] = self.anchor.value if self.anchor else None
        return d


def default_alpha(lo: int, hi: int, ref: int) -> dict[int, float]:
    """Zero before implementation, then a saturating decline per intensity unit."""
    return {j: (0.0 if j < 0 else -0.6 * (1 - math.exp(-(j + 1) / 8))) for j in range(lo, hi + 1)
            if j != ref}


def default_beta(lo: int, hi: int) -> dict[int, float]:
    return {j: -0.2 - 0.3 * (1 - math.exp(-max(j, 0) / 10)) for j in range(lo, hi + 1)}


def _timing_map(raw: Optional[dict]) -> dict[PolicyKind, PolicyTiming]:
    out = {p: PolicyTiming() for p in POLICIES}
    for key, val in (raw or {}).items():
        pol = key if isinstance(key, PolicyKind) else PolicyKind.parse(key)
        out[pol] = val if isinstance(val, PolicyTiming) else PolicyTiming.from_dict(val)
    return out


def _int_keyed(raw: Optional[dict]) -> Optional[dict[int, float]]:
    if raw is None:
        return None
    return {int(k): float(v) for k, v in raw.items()}


@dataclass(frozen=True)
class LinearDgpConfig:
    n_countries: int = 135
    n_days: int = 150
    policy: PolicyKind = PolicyKind.EVENTS_CANCELLATION
    variant: Variant = Variant.MULTI_EVENT_INTENSITY
    window_lo: int = -20
    window_hi: int = 35
    reference_event_time: int = -20
    # event-time coefficients; None selects default_alpha / default_beta
    true_alpha: Optional[dict[int, float]] = None
    true_beta: Optional[dict[int, float]] = None
    # time effects by days since first case; None draws a Gaussian random walk
    gamma_time: Optional[dict[int, float]] = None
    gamma_step_sd: float = 0.05
    # Monday..Sunday; None draws N(0, 0.3)
    delta_dow: Optional[tuple[float, ...]] = None
    # keyed by region name; None draws N(0, 1)
    rho_region: Optional[dict[str, float]] = None
    intercept: float = 5.0
    phi: float = 0.4
    theta: tuple[float, float, float, float] = (0.5, -0.2, 0.3, 0.02)
    noise_sd: float = 0.1
    timing: dict[PolicyKind, PolicyTiming] = field(default_factory=lambda: _timing_map(None))
    outcome_category: MobilityCategory = MobilityCategory.RESIDENTIAL
    start_date: dt.date = dt.date(2020, 1, 20)
    start_spread: int = 60
    seed: int = 0

    def __post_init__(self):
        if self.noise_sd < 0:
            raise ConfigError("noise_sd must be >= 0")
        if not 1 <= self.n_countries <= len(ISO3_CODES):
            raise ConfigError(f"n_countries must be in 1..{len(ISO3_CODES)}")
        if self.n_days < 2:
            raise ConfigError("n_days must be at least 2")
        if not self.window_lo <= self.reference_event_time <= self.window_hi \
                or self.window_lo >= self.window_hi:
            raise ConfigError("inconsistent event window")
        window = range(self.window_lo, self.window_hi + 1)
        alpha = self.alpha
        bad = [j for j in alpha if j not in window]
        if bad:
            raise ConfigError(f"true_alpha has event times outside the window "
                              f"[{self.window_lo}, {self.window_hi}]: {sorted(bad)}")
        if alpha.get(self.reference_event_time, 0.0) != 0.0:
            raise ConfigError("true_alpha at the reference event time must be 0")
        bad = [j for j in self.beta if j not in window]
        if bad:
            raise ConfigError(f"true_beta has event times outside the window: {sorted(bad)}")
        if self.delta_dow is not None and len(self.delta_dow) != 7:
            raise ConfigError("delta_dow needs 7 values")
        for p, t in self.timing.items():
            if t.anchor is not None and self.timing[t.anchor].anchor is not None:
                raise ConfigError(f"{p.value}: anchors cannot be chained")

    @property
    def alpha(self) -> dict[int, float]:
        if self.true_alpha is None:
            return default_alpha(self.window_lo, self.window_hi, self.reference_event_time)
        return self.true_alpha

    @property
    def beta(self) -> dict[int, float]:
        if self.true_beta is None:
            return default_beta(self.window_lo, self.window_hi)
        return self.true_beta

    @classmethod
    def from_dict(cls, d: dict) -> "LinearDgpConfig":
        d = {k: v for k, v in d.items() if k != "kind"}
        unknown = set(d) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ConfigError(f"unknown linear config keys: {sorted(unknown)}")
        if "policy" in d:
            d["policy"] = PolicyKind.parse(d["policy"])
        if "variant" in d:
            d["variant"] = Variant.parse(d["variant"])
        for k in ("true_alpha", "true_beta", "gamma_time"):
            if k in d:
                d[k] = _int_keyed(d[k])
        if d.get("delta_dow") is not None:
            d["delta_dow"] = tuple(float(v) for v in d["delta_dow"])
        if "theta" in d:
            d["theta"] = tuple(float(v) for v in d["theta"])
        if "timing" in d:
            d["timing"] = _timing_map(d["timing"])
        if "outcome_category" in d:
            d["outcome_category"] = MobilityCategory.parse(d["outcome_category"])
        if "start_date" in d:
            d["start_date"] = dt.date.fromisoformat(d["start_date"])
        return cls(**d)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"kind": "linear"}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, (PolicyKind, Variant, MobilityCategory)):
                v = v.value
            elif isinstance(v, dt.date):
                v = v.isoformat()
            elif f.name == "timing":
                v = {p.value: t.to_dict() for p, t in v.items()}
            elif isinstance(v, dict):
                v = {str(k): val for k, val in v.items()}
            elif isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out


@dataclass(frozen=True, eq=False)
class LinearTruth:
    """True coefficients keyed by design column label, expressed relative to
    the omitted dummy levels the design uses (smallest t, Monday, Africa)."""

    coefficients: dict[str, float]
    config: LinearDgpConfig

    @property
    def alpha(self) -> dict[int, float]:
        cfg = self.config
        return {j: self.coefficients[event_label(j)] for j in range(cfg.window_lo, cfg.window_hi + 1)
                if j != cfg.reference_event_time}

    @property
    def beta(self) -> dict[int, float]:
        cfg = self.config
        if not cfg.variant.multi:
            return {}
        return {j: self.coefficients[conc_label(j)] for j in range(cfg.window_lo, cfg.window_hi + 1)}

    def to_dict(self) -> dict:
        return {"kind": "linear", "config": self.config.to_dict(),
                "coefficients": dict(self.coefficients)}


def _draw_schedules(rng: np.random.Generator, country: str, day_zero: dt.date,
                    timing: dict[PolicyKind, PolicyTiming]) -> dict[PolicyKind, PolicySchedule]:
    impl_offset: dict[PolicyKind, Optional[int]] = {}
    out = {}
    ordered = [p for p in POLICIES if timing[p].anchor is None] + \
              [p for p in POLICIES if timing[p].anchor is not None]
    for p in ordered:
        tm = timing[p]
        # fixed number of draws per policy keeps streams aligned across configs
        u_never, u_start, u_level, u_esc, u_lag, u_new = rng.random(6)
        if u_never < tm.p_never:
            impl_offset[p] = None
            continue
        if tm.anchor is None:
            offset = tm.start_lo + int(u_start * (tm.start_hi - tm.start_lo + 1))
        else:
            base = impl_offset.get(tm.anchor)
            if base is None:
                impl_offset[p] = None
                continue
            offset = base + tm.anchor_lag_lo + int(u_start * (tm.anchor_lag_hi - tm.anchor_lag_lo + 1))
        level = tm.level_lo + int(u_level * (tm.level_hi - tm.level_lo + 1))
        start = day_zero + dt.timedelta(days=offset)
        changes = [(start, level)]
        if u_esc < tm.p_escalate and level < 6:
            lag = tm.escalate_lag_lo + int(u_lag * (tm.escalate_lag_hi - tm.escalate_lag_lo + 1))
            new_level = level + 1 + int(u_new * (6 - level))
            changes.append((start + dt.timedelta(days=lag), new_level))
        impl_offset[p] = offset
        out[p] = PolicySchedule(country, p, tuple(changes))
    return out


def _draw_covariates(rng: np.random.Generator, countries: list[str]) -> dict[str, CountryCovariates]:
    n = len(countries)
    regions = np.resize(np.array(list(Region), dtype=object), n)
    regions = regions[rng.permutation(n)]
    gdp = np.exp(rng.normal(9.0, 1.0, n))
    pop = np.exp(rng.normal(16.0, 1.5, n))
    dens = np.exp(rng.normal(4.5, 1.0, n))
    urb = rng.uniform(20.0, 95.0, n)
    return {c: CountryCovariates(c, float(gdp[i]), float(pop[i]), float(dens[i]), float(urb[i]),
                                 regions[i])
            for i, c in enumerate(countries)}


def _fabricated_cumulative(rng: np.random.Generator, n_days: int) -> np.ndarray:
    """Logistic cumulative-case path starting at 1; independent of the outcome."""
    cap = 10 ** rng.uniform(3.0, 6.0)
    rate = rng.uniform(0.05, 0.25)
    t = np.arange(n_days)
    path = np.floor(cap / (1.0 + (cap - 1.0) * np.exp(-rate * t)))
    return np.maximum.accumulate(np.maximum(path, 1.0)).astype(np.int64)


def simulate_linear_panel(config: LinearDgpConfig) -> tuple[Panel, LinearTruth]:
    cfg = config
    root = np.random.SeedSequence(cfg.seed)
    global_ss, *country_ss = root.spawn(cfg.n_countries + 1)
    grng = np.random.default_rng(global_ss)

    countries = list(ISO3_CODES[: cfg.n_countries])
    covariates = _draw_covariates(grng, countries)
    if cfg.gamma_time is None:
        gamma = np.cumsum(grng.normal(0.0, cfg.gamma_step_sd, cfg.n_days))
        gamma_time = {t: float(gamma[t]) for t in range(cfg.n_days)}
    else:
        gamma_time = {t: cfg.gamma_time.get(t, 0.0) for t in range(cfg.n_days)}
    delta = cfg.delta_dow if cfg.delta_dow is not None else tuple(grng.normal(0.0, 0.3, 7))
    if cfg.rho_region is None:
        draws = grng.normal(0.0, 1.0, len(REGION_ORDER))
        rho = {r: float(draws[k]) for k, r in enumerate(REGION_ORDER)}
    else:
        rho = {Region.parse(k): float(v) for k, v in cfg.rho_region.items()}
        rho = {r: rho.get(r, 0.0) for r in REGION_ORDER}

    alpha, beta = cfg.alpha, cfg.beta
    window = range(cfg.window_lo, cfg.window_hi + 1)
    schedules: list[PolicySchedule] = []
    epi: list[EpiSeries] = []
    mobility: list[MobilitySeries] = []
    lo_band, hi_band = MOBILITY_BAND

    for i, country in enumerate(countries):
        rng = np.random.default_rng(country_ss[i])
        day_zero = cfg.start_date + dt.timedelta(days=int(rng.integers(0, cfg.start_spread + 1)))
        drawn = _draw_schedules(rng, country, day_zero, cfg.timing)
        schedules.extend(drawn[p] for p in POLICIES if p in drawn)
        cum = _fabricated_cumulative(rng, cfg.n_days)
        noise = rng.normal(0.0, 1.0, cfg.n_days) * cfg.noise_sd
        new = np.diff(cum, prepend=0)
        epi.append(EpiSeries.from_new_cases(country, day_zero, new))

        cov = covariates[country]
        static = cfg.intercept + rho[cov.region] + sum(
            th * x for th, x in zip(cfg.theta, cov.transformed()))
        own = drawn.get(cfg.policy)
        impl = own.implementation_date if own else None
        impl_level = own.level_on(impl) if own else 0
        others = [drawn[p] for p in POLICIES if p is not cfg.policy and p in drawn]
        values = {}
        for t in range(cfg.n_days):
            day = day_zero + dt.timedelta(days=t)
            y = static + gamma_time[t] + delta[day.weekday()]
            if t > 0:
                y += cfg.phi * math.log(cum[t - 1])
            if impl is not None:
                j = (day - impl).days
                if j in window:
                    if cfg.variant.intensity:
                        s = own.level_on(day) if j >= 0 else impl_level
                    else:
                        s = 1
                    if j != cfg.reference_event_time:
                        y += alpha.get(j, 0.0) * s
                    if cfg.variant.multi:
                        active = [lv for lv in (o.level_on(day) for o in others) if lv > 0]
                        if cfg.variant.intensity:
                            conc = sum(active) / len(active) if active else 0.0
                        else:
                            conc = 1.0 if active else 0.0
                        y += beta.get(j, 0.0) * conc
            y += noise[t]
            if not lo_band <= y <= hi_band:
                raise ConfigError(f"{country} day {t}: simulated outcome {y:.1f} leaves the "
                                  f"mobility band {MOBILITY_BAND}; shrink the coefficients")
            values[day] = float(y)
        mobility.append(MobilitySeries(country, {cfg.outcome_category: values}))

    panel = build_panel(schedules, epi, mobility, covariates.values())

    # re-express in the design's parameterization: levels t=1 (t=0 rows carry
    # no lagged prevalence), Monday and Africa are absorbed by the intercept
    coef: dict[str, float] = {}
    for j in window:
        if j != cfg.reference_event_time:
            coef[event_label(j)] = alpha.get(j, 0.0)
    if cfg.variant.multi:
        for j in window:
            coef[conc_label(j)] = beta.get(j, 0.0)
    base_t = 1
    for t in range(base_t + 1, cfg.n_days):
        coef[f"time[t={t}]"] = gamma_time[t] - gamma_time[base_t]
    for d in range(1, 7):
        coef[f"dow[{d}]"] = float(delta[d] - delta[0])
    base_region = REGION_ORDER[0]
    for r in REGION_ORDER[1:]:
        coef[f"region[{r.value}]"] = rho[r] - rho[base_region]
    coef["lnprev"] = cfg.phi
    for name, th in zip(COVARIATE_NAMES, cfg.theta):
        coef[f"cov[{name}]"] = th
    coef["intercept"] = cfg.intercept + gamma_time[base_t] + float(delta[0]) + rho[base_region]
    return panel, LinearTruth(coef, cfg)


@dataclass(frozen=True)
class SirDgpConfig:
    n_countries: int = 135
    n_days: int = 150
    # per-country parameters are drawn uniformly from these ranges
    # (population log-uniformly); equal endpoints fix a value
    population: tuple[float, float] = (1e6, 5e7)
    initial_infected: tuple[int, int] = (5, 50)
    beta0: tuple[float, float] = (0.22, 0.32)
    gamma_rec: tuple[float, float] = (0.1, 0.1)
    effects: dict[PolicyKind, float] = field(default_factory=dict)
    detection: float = 0.3
    dow_multipliers: tuple[float, ...] = (1.1, 1.1, 1.05, 1.0, 1.0, 0.9, 0.85)
    timing: dict[PolicyKind, PolicyTiming] = field(
        default_factory=lambda: {p: PolicyTiming.never() for p in POLICIES})
    start_date: dt.date = dt.date(2020, 1, 20)
    start_spread: int = 60
    seed: int = 0

    def __post_init__(self):
        for p, e in self.effects.items():
            if not 0.0 <= e <= 1.0:
                raise ConfigError(f"effect of {p.value} must lie in [0, 1], got {e}")
        lo, hi = self.gamma_rec
        if not 0 < lo <= hi < 1:
            raise ConfigError("recovery rate must lie in (0, 1)")
        if not 0 < self.detection <= 1:
            raise ConfigError("detection rate must lie in (0, 1]")
        if len(self.dow_multipliers) != 7 or abs(sum(self.dow_multipliers) / 7 - 1) > 1e-9:
            raise ConfigError("dow_multipliers needs 7 values with mean 1")
        if min(self.dow_multipliers) < 0:
            raise ConfigError("dow_multipliers must be non-negative")
        if not 1 <= self.n_countries <= len(ISO3_CODES):
            raise ConfigError(f"n_countries must be in 1..{len(ISO3_CODES)}")
        if self.population[0] <= 0 or self.population[0] > self.population[1]:
            raise ConfigError("bad population range")
        if self.initial_infected[0] < 1 or self.initial_infected[0] > self.initial_infected[1]:
            raise ConfigError("bad initial_infected range")
        if self.beta0[0] < 0 or self.beta0[0] > self.beta0[1]:
            raise ConfigError("bad beta0 range")

    @classmethod
    def from_dict(cls, d: dict) -> "SirDgpConfig":
        d = {k: v for k, v in d.items() if k != "kind"}
        unknown = set(d) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ConfigError(f"unknown SIR config keys: {sorted(unknown)}")
        for k in ("population", "beta0", "gamma_rec"):
            if k in d:
                d[k] = tuple(float(v) for v in d[k])
        if "initial_infected" in d:
            d["initial_infected"] = tuple(int(v) for v in d["initial_infected"])
        if "dow_multipliers" in d:
            d["dow_multipliers"] = tuple(float(v) for v in d["dow_multipliers"])
        if "effects" in d:
            d["effects"] = {PolicyKind.parse(k): float(v) for k, v in d["effects"].items()}
        if "timing" in d:
            timing = {p: PolicyTiming.never() for p in POLICIES}
            timing.update({PolicyKind.parse(k): PolicyTiming.from_dict(v)
                           for k, v in d["timing"].items()})
            d["timing"] = timing
        if "start_date" in d:
            d["start_date"] = dt.date.fromisoformat(d["start_date"])
        return cls(**d)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"kind": "sir"}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, dt.date):
                v = v.isoformat()
            elif f.name == "timing":
                v = {p.value: t.to_dict() for p, t in v.items()}
            elif f.name == "effects":
                v = {p.value: e for p, e in v.items()}
            elif isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out


@dataclass(frozen=True, eq=False)
class SirTruth:
    config: SirDgpConfig
    # one row per country: population, initial_infected, beta0, gamma_rec, day_zero, clamped
    countries: pd.DataFrame
    # one row per (country, date): S, I, R, new_infections, reported
    states: pd.DataFrame

    def to_dict(self) -> dict:
        rows = self.countries.reset_index().to_dict(orient="records")
        return {"kind": "sir", "config": self.config.to_dict(), "countries": rows}


def transmission_multiplier(levels: dict[PolicyKind, int], effects: dict[PolicyKind, float]) -> float:
    """Product over policies of (1 - effect * level / 6)."""
    m = 1.0
    for p, e in effects.items():
        m *= 1.0 - e * levels.get(p, 0) / 6.0
    return m


def simulate_sir_panel(config: SirDgpConfig) -> tuple[Panel, SirTruth]:
    cfg = config
    root = np.random.SeedSequence(cfg.seed)
    global_ss, *country_ss = root.spawn(cfg.n_countries + 1)
    countries = list(ISO3_CODES[: cfg.n_countries])
    covariates = _draw_covariates(np.random.default_rng(global_ss), countries)

    schedules, epi, country_rows, state_frames = [], [], [], []
    for i, country in enumerate(countries):
        rng = np.random.default_rng(country_ss[i])
        day_zero = cfg.start_date + dt.timedelta(days=int(rng.integers(0, cfg.start_spread + 1)))
        drawn = _draw_schedules(rng, country, day_zero, cfg.timing)
        schedules.extend(drawn[p] for p in POLICIES if p in drawn)

        lo, hi = cfg.population
        N = float(math.exp(rng.uniform(math.log(lo), math.log(hi))))
        I0 = int(rng.integers(cfg.initial_infected[0], cfg.initial_infected[1] + 1))
        b0 = float(rng.uniform(*cfg.beta0))
        g = float(rng.uniform(*cfg.gamma_rec))
        I0 = min(I0, N)

        S = np.empty(cfg.n_days)
        I = np.empty(cfg.n_days)
        R = np.empty(cfg.n_days)
        new_inf = np.empty(cfg.n_days)
        S[0], I[0], R[0], new_inf[0] = N - I0, float(I0), 0.0, float(I0)
        clamped = False
        for t in range(1, cfg.n_days):
            day = day_zero + dt.timedelta(days=t)
            levels = {p: s.level_on(day) for p, s in drawn.items()}
            beta_t = b0 * transmission_multiplier(levels, cfg.effects)
            inf = beta_t * S[t - 1] * I[t - 1] / N
            if inf > S[t - 1]:
                inf, clamped = S[t - 1], True
            rec = g * I[t - 1]
            new_inf[t] = inf
            S[t] = S[t - 1] - inf
            I[t] = I[t - 1] + inf - rec
            R[t] = R[t - 1] + rec
        days = [day_zero + dt.timedelta(days=t) for t in range(cfg.n_days)]
        mult = np.array([cfg.dow_multipliers[d.weekday()] for d in days])
        reported = rng.poisson(cfg.detection * new_inf * mult)
        epi.append(EpiSeries.from_new_cases(country, day_zero, reported))
        country_rows.append({"country": country, "population": N, "initial_infected": I0,
                             "beta0": b0, "gamma_rec": g, "day_zero": day_zero.isoformat(),
                             "clamped": clamped})
        state_frames.append(pd.DataFrame({
            "country": country, "date": [d.isoformat() for d in days], "S": S, "I": I, "R": R,
            "new_infections": new_inf, "reported": reported}))

    panel = build_panel(schedules, epi, [], covariates.values())
    truth = SirTruth(cfg, pd.DataFrame(country_rows).set_index("country"),
                     pd.concat(state_frames, ignore_index=True))
    return panel, truth


def config_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "linear":
        return LinearDgpConfig.from_dict(d)
    if kind == "sir":
        return SirDgpConfig.from_dict(d)
    raise ConfigError(f"config 'kind' must be 'linear' or 'sir', got {kind!r}")


def simulate(config):
    if isinstance(config, LinearDgpConfig):
        return simulate_linear_panel(config)
    if isinstance(config, SirDgpConfig):
        return simulate_sir_panel(config)
    raise TypeError(f"not a simulation config: {type(config).__name__}")
