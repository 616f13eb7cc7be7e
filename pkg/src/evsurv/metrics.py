"""Survival evaluation: Kaplan-Meier, time-dependent concordance, IPCW
Brier score and binomial log-likelihood, survival grids, and calibration
curves for belief prediction intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from . import grfn
from .data import Dataset
from .model import ModelParams, Standardizer, fused_params, survival_bounds_grid

_H_FLOOR = 1e-300


@dataclass(frozen=True)
class StepFunction:
    """Right-continuous step function; value before the first knot is 1."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape:
            raise ValueError("times and values must be matching 1-d arrays")
        if t.shape[0] == 0:
            raise ValueError("step function needs at least one knot")
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("knots must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def __call__(self, t):
        idx = np.searchsorted(self.times, np.asarray(t, dtype=float),
                              side="right") - 1
        return np.where(idx < 0, 1.0, self.values[np.maximum(idx, 0)])

    def eval_left(self, t):
        """Value just before t (left limit)."""
        idx = np.searchsorted(self.times, np.asarray(t, dtype=float),
                              side="left") - 1
        return np.where(idx < 0, 1.0, self.values[np.maximum(idx, 0)])


def kaplan_meier(durations, events) -> StepFunction:
    """Product-limit estimate of the survival function of the event time."""
    durations = np.asarray(durations, dtype=float)
    events = np.asarray(events)
    if durations.ndim != 1 or durations.shape != events.shape:
        raise ValueError("durations and events must be matching 1-d arrays")
    if durations.shape[0] == 0:
        raise ValueError("empty sample")
    if not np.all(np.isin(events, (0, 1))):
        raise ValueError("events must be 0 or 1")
    order = np.argsort(durations, kind="stable")
    t_sorted = durations[order]
    e_sorted = events[order].astype(np.int64)
    uniq, start = np.unique(t_sorted, return_index=True)
    n = durations.shape[0]
    at_risk = n - start
    deaths = np.add.reduceat(e_sorted, start)
    surv = np.cumprod(1.0 - deaths / at_risk)
    return StepFunction(uniq, surv)


def censoring_survival(durations, events) -> StepFunction:
    """Kaplan-Meier of the censoring distribution (event flags flipped)."""
    events = np.asarray(events)
    return kaplan_meier(durations, 1 - events)


@dataclass(frozen=True)
class SurvivalGrid:
    """Predicted survival values, one row per record over a shared time grid."""

    times: np.ndarray
    surv: np.ndarray
    mode: str = "mid"

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        s = np.asarray(self.surv, dtype=float)
        if t.ndim != 1 or s.ndim != 2 or s.shape[1] != t.shape[0]:
            raise ValueError("surv must be (n, len(times))")
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("times must be strictly increasing")
        if np.any(s < -1e-9) or np.any(s > 1.0 + 1e-9):
            raise ValueError("survival values must lie in [0, 1]")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "surv", np.clip(s, 0.0, 1.0))

    def column_index(self, t):
        """Index of the last grid time <= t; clamped to the grid ends."""
        idx = np.searchsorted(self.times, np.asarray(t, dtype=float),
                              side="right") - 1
        return np.clip(idx, 0, self.times.shape[0] - 1)

    def values_at(self, t):
        """Stepwise survival of every record at scalar time t, shape (n,)."""
        return self.surv[:, int(self.column_index(t))]


def survival_grid(m: ModelParams, s: Standardizer, data: Dataset,
                  times, mode: str = "mid") -> SurvivalGrid:
    """Predicted survival over a time grid.

    mode selects the lower (belief), upper (plausibility), or mid
    (their average) survival curve.
    """
    if mode not in ("lower", "mid", "upper"):
        raise ValueError("mode must be lower, mid, or upper")
    lower, upper = survival_bounds_grid(m, s, data.x, np.asarray(times, float))
    if mode == "lower":
        values = lower
    elif mode == "upper":
        values = upper
    else:
        values = 0.5 * (lower + upper)
    return SurvivalGrid(np.asarray(times, dtype=float), values, mode)


def c_index_td(grid: SurvivalGrid, durations, events) -> float:
    """Time-dependent concordance over comparable pairs.

    A pair (i, j) with an observed event at T_i < T_j is concordant when
    record i's own-time survival S(T_i | x_i) is below S(T_i | x_j); ties in
    survival count one half.  Tied event times follow the usual adjustments:
    two events at the same time count fully when their survival values tie,
    an event tied with a censoring counts like an ordinary comparable pair.
    Predictions independent of the record therefore score exactly 0.5.
    """
    durations = np.asarray(durations, dtype=float)
    events = np.asarray(events).astype(np.int64)
    n = durations.shape[0]
    if grid.surv.shape[0] != n:
        raise ValueError("grid rows disagree with record count")
    col = grid.column_index(durations)
    num = 0.0
    den = 0
    idx = np.arange(n)
    for i in np.flatnonzero(events == 1):
        s_row = grid.surv[:, col[i]]
        s_i = s_row[i]
        later = durations > durations[i]
        if later.any():
            sj = s_row[later]
            num += float((s_i < sj).sum()) + 0.5 * float((s_i == sj).sum())
            den += int(later.sum())
        tied = (durations == durations[i]) & (idx != i)
        if tied.any():
            tied_ev = tied & (events == 1)
            if tied_ev.any():
                sj = s_row[tied_ev]
                num += float((s_i == sj).sum()) + 0.5 * float((s_i != sj).sum())
                den += int(tied_ev.sum())
            tied_cen = tied & (events == 0)
            if tied_cen.any():
                sj = s_row[tied_cen]
                num += float((s_i < sj).sum()) + 0.5 * float((s_i == sj).sum())
                den += int(tied_cen.sum())
    if den == 0:
        raise ValueError("no comparable pairs")
    return num / den


def brier_score(t: float, grid: SurvivalGrid, durations, events,
                g_cens: StepFunction) -> float:
    """Inverse-censoring-weighted Brier score at time t.

    Event weights use the censoring survival just before the event time;
    at-risk weights use it at t.  Weights are clamped below at 1/(n+1).
    """
    durations = np.asarray(durations, dtype=float)
    events = np.asarray(events).astype(np.int64)
    n = durations.shape[0]
    if n == 0:
        raise ValueError("empty sample")
    s_t = grid.values_at(t)
    floor = 1.0 / (n + 1)
    g_ti = np.maximum(g_cens.eval_left(durations), floor)
    g_t = max(float(g_cens(t)), floor)
    had_event = (durations <= t) & (events == 1)
    at_risk = durations > t
    term1 = np.where(had_event, s_t ** 2 / g_ti, 0.0)
    term2 = np.where(at_risk, (1.0 - s_t) ** 2 / g_t, 0.0)
    return float((term1 + term2).mean())


def binomial_ll(t: float, grid: SurvivalGrid, durations, events,
                g_cens: StepFunction, prob_floor: float = 1e-12) -> float:
    """Inverse-censoring-weighted binomial log-likelihood at time t (<= 0)."""
    durations = np.asarray(durations, dtype=float)
    events = np.asarray(events).astype(np.int64)
    n = durations.shape[0]
    if n == 0:
        raise ValueError("empty sample")
    s_t = np.clip(grid.values_at(t), prob_floor, 1.0 - prob_floor)
    floor = 1.0 / (n + 1)
    g_ti = np.maximum(g_cens.eval_left(durations), floor)
    g_t = max(float(g_cens(t)), floor)
    had_event = (durations <= t) & (events == 1)
    at_risk = durations > t
    term1 = np.where(had_event, np.log(1.0 - s_t) / g_ti, 0.0)
    term2 = np.where(at_risk, np.log(s_t) / g_t, 0.0)
    return float((term1 + term2).mean())


def _integration_times(t1: float, t2: float, num: int = 100) -> np.ndarray:
    if not t2 > t1:
        raise ValueError("need t1 < t2")
    return np.linspace(t1, t2, num)


def integrated_brier(grid: SurvivalGrid, durations, events,
                     g_cens: StepFunction, t1: float, t2: float) -> float:
    """Rectangle-rule average of the Brier score over a 100-point grid."""
    ts = _integration_times(t1, t2)
    vals = [brier_score(t, grid, durations, events, g_cens) for t in ts]
    return float(np.mean(vals))


def integrated_bll(grid: SurvivalGrid, durations, events,
                   g_cens: StepFunction, t1: float, t2: float) -> float:
    """Rectangle-rule average of the binomial log-likelihood (<= 0)."""
    ts = _integration_times(t1, t2)
    vals = [binomial_ll(t, grid, durations, events, g_cens) for t in ts]
    return float(np.mean(vals))


@dataclass(frozen=True)
class CalibrationCurve:
    """Nominal levels vs observed coverage for the two interval families."""

    alphas: np.ndarray
    coverage_bpi: np.ndarray
    coverage_prob: np.ndarray
    n_used: int
    n_excluded: int

    def __post_init__(self):
        a = np.asarray(self.alphas, dtype=float)
        cb = np.asarray(self.coverage_bpi, dtype=float)
        cp = np.asarray(self.coverage_prob, dtype=float)
        if a.ndim != 1 or a.shape != cb.shape or a.shape != cp.shape:
            raise ValueError("curve arrays must have matching shapes")
        if np.any(a <= 0.0) or np.any(a >= 1.0) or np.any(np.diff(a) <= 0.0):
            raise ValueError("alphas must be ascending within (0, 1)")
        object.__setattr__(self, "alphas", a)
        object.__setattr__(self, "coverage_bpi", cb)
        object.__setattr__(self, "coverage_prob", cp)


def calibration_curve(m: ModelParams, s: Standardizer, data: Dataset,
                      alphas) -> CalibrationCurve:
    """Coverage of belief prediction intervals and of the probabilistic
    comparator N(mu, sigma2 + 1/h) at each nominal level.

    Records are scored against the true duration when the dataset carries
    one, otherwise only uncensored records are scored against the observed
    duration.  A record covered at level alpha is one whose log duration
    falls inside the centered interval holding belief (resp. probability)
    alpha; coverage is computed through the belief level of the centered
    interval that just reaches the observation, which is equivalent and
    avoids a per-record bisection.
    Vacuous predictions cannot carry a belief interval and are excluded
    (counted in n_excluded).
    """
    alphas = np.asarray(alphas, dtype=float)
    if data.t_true is not None:
        y = np.log(data.t_true)
        keep = np.ones(len(data), dtype=bool)
    else:
        keep = data.d == 1
        if not keep.any():
            raise ValueError("calibration needs uncensored records or true durations")
        y = np.log(data.t_star[keep])
    x = data.x[keep]
    mu, var, h = fused_params(m, s.transform(x))
    ok = h > _H_FLOOR
    n_excluded = int((~ok).sum())
    if not ok.any():
        raise ValueError("all predictions are vacuous")
    mu, var, h, y = mu[ok], var[ok], h[ok], y[ok]
    r = np.abs(y - mu)
    bel_level, _ = grfn._bounded_measures(mu, var, h, mu - r, mu + r)
    prob_level = 2.0 * ndtr(r / np.sqrt(var + 1.0 / h)) - 1.0
    cov_bpi = (bel_level[None, :] <= alphas[:, None]).mean(axis=1)
    cov_prob = (prob_level[None, :] <= alphas[:, None]).mean(axis=1)
    return CalibrationCurve(alphas, cov_bpi, cov_prob, int(ok.sum()), n_excluded)
