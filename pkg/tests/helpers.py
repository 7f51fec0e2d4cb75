import datetime as dt

from multievent.panel import (CountryCovariates, EpiSeries, MobilitySeries, PolicyKind,
                              PolicySchedule, Region, build_panel)

D0 = dt.date(2020, 3, 1)


def day(offset: int) -> dt.date:
    return D0 + dt.timedelta(days=offset)


def covs(country, region=Region.EUROPE, gdp=20000.0, pop=5e6, dens=100.0, urb=70.0):
    return CountryCovariates(country, gdp, pop, dens, urb, region)


def epi(country, counts, start=D0):
    return EpiSeries.from_new_cases(country, start, counts)


def sched(country, policy, *changes):
    """changes: (day offset from D0, level) pairs."""
    return PolicySchedule(country, policy, tuple((day(o), lv) for o, lv in changes))


def small_panel(policies=(), mobility=(), countries=("FRA", "DEU"), n_days=10):
    return build_panel(policies, [epi(c, [1] * n_days) for c in countries], mobility,
                       [covs(c) for c in countries])


def overlap_config(seed, **kw):
    """Policy A has no effect; policy B, adopted around A's date, has a strong
    negative profile that loads on A's concurrent-policy column."""
    from multievent.simgen import LinearDgpConfig, PolicyTiming
    from multievent.panel import POLICIES

    a, b = PolicyKind.EVENTS_CANCELLATION, PolicyKind.GATHERINGS_RESTRICTIONS
    timing = {p: PolicyTiming.never() for p in POLICIES}
    timing[a] = PolicyTiming(start_lo=-10, start_hi=70, p_never=0.15)
    timing[b] = PolicyTiming(p_never=0.1, anchor=a, anchor_lag_lo=-3, anchor_lag_hi=8)
    beta = {j: (-1.0 if j >= 0 else 0.0) - 0.05 * max(j, 0) for j in range(-20, 36)}
    return LinearDgpConfig(policy=a, true_alpha={}, true_beta=beta, timing=timing,
                           noise_sd=0.1, seed=seed, **kw)


def sir_mid_epidemic_config(seed, **kw):
    from multievent.simgen import PolicyTiming, SirDgpConfig
    from multievent.panel import POLICIES

    timing = {p: PolicyTiming.never() for p in POLICIES}
    timing[PolicyKind.SCHOOL_CLOSURE] = PolicyTiming(start_lo=20, start_hi=60, p_never=0.2)
    return SirDgpConfig(effects={PolicyKind.SCHOOL_CLOSURE: 0.5}, timing=timing, seed=seed, **kw)


def full_suppression_config(seed=0, **kw):
    from multievent.simgen import PolicyTiming, SirDgpConfig
    from multievent.panel import POLICIES

    timing = {p: PolicyTiming.never() for p in POLICIES}
    timing[PolicyKind.STAY_AT_HOME] = PolicyTiming(start_lo=0, start_hi=0, p_never=0.0,
                                                   level_lo=6, level_hi=6, p_escalate=0.0)
    return SirDgpConfig(effects={PolicyKind.STAY_AT_HOME: 1.0}, timing=timing, seed=seed, **kw)
