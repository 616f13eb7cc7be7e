"""Synthetic right-censored time-to-event generators.

Three families:

  * gen_illustrative: one covariate, a strongly nonlinear log-time mean with
    heteroscedastic Gaussian noise, and optional uniform random censoring.
  * gen_cox_exponential: ten covariates with an exponential proportional
    hazards time, either a linear or a non-linear (Gaussian bump) log risk,
    censored administratively at the empirical median so about half the
    records are censored.
  * gen_nlnph: hazard with a time-covariate interaction; event times are
    drawn by numerically inverting the cumulative hazard.

All generators return a Dataset whose true_duration column carries the
uncensored time.
"""

from __future__ import annotations

import math

import numpy as np

from .data import Dataset

_COX_P = 10
_NLPH_LAMBDA_MAX = 5.0
_NLPH_RADIUS = 0.5


def gen_illustrative(n: int, censor_prob: float, seed: int) -> Dataset:
    """One-dimensional heteroscedastic benchmark.

    X ~ U[-2, 2] and the event time is
    T = exp(1.5 X + 2 cos(3X)^3 + ((X^2 + 5) / (3 sqrt 5)) V) with V standard
    normal.  Each record is independently selected for censoring with
    probability censor_prob; a selected record draws a censoring time
    tau ~ U(0, max T) over the realized sample and keeps min(t, tau).  The
    event flag stays 1 when tau lands at or above t.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    if not 0.0 <= censor_prob <= 1.0:
        raise ValueError("censor_prob must be in [0, 1]")
    rng = np.random.default_rng(seed)
    x = rng.uniform(-2.0, 2.0, size=n)
    v = rng.standard_normal(n)
    log_t = 1.5 * x + 2.0 * np.cos(3.0 * x) ** 3 \
        + (x ** 2 + 5.0) / (3.0 * math.sqrt(5.0)) * v
    t = np.exp(log_t)
    t_star = t.copy()
    if censor_prob > 0.0:
        selected = rng.uniform(size=n) < censor_prob
        tau = rng.uniform(0.0, t.max(), size=n)
        t_star = np.where(selected, np.minimum(t, tau), t)
    d = (t_star == t).astype(np.int64)
    return Dataset(x[:, None], t_star, d, t)


def _cox_log_risk(x: np.ndarray, kind: str) -> np.ndarray:
    if kind == "lph":
        return x[:, 0] + 2.0 * x[:, 1]
    if kind == "nlph":
        return math.log(_NLPH_LAMBDA_MAX) * np.exp(
            -(x[:, 0] ** 2 + x[:, 1] ** 2) / (2.0 * _NLPH_RADIUS ** 2))
    raise ValueError(f"unknown kind: {kind!r}")


def gen_cox_exponential(n: int, kind: str, lambda0: float, seed: int) -> Dataset:
    """Exponential proportional-hazards sample with ~50% censoring.

    Ten covariates U[-1, 1]; T = -log(U) / (lambda0 exp(g(x))) with
    g(x) = x0 + 2 x1 for kind="lph" and a Gaussian bump of height
    log(5) and radius 0.5 in (x0, x1) for kind="nlph".  Records are censored
    administratively at the empirical median event time.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    if lambda0 <= 0.0:
        raise ValueError("lambda0 must be positive")
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=(n, _COX_P))
    g = _cox_log_risk(x, kind)
    u = rng.uniform(size=n)
    t = -np.log(u) / (lambda0 * np.exp(g))
    tau = float(np.median(t))
    t_star = np.minimum(t, tau)
    d = (t <= tau).astype(np.int64)
    return Dataset(x, t_star, d, t)


def default_nlnph_g(t, x):
    """Stand-in time-interacting log hazard g(t, x) = g1(x) + g2(x) t.

    g1(x) = x0 + 2 x1 and g2(x) = (x2 + 1) / 2 >= 0, so the cumulative
    hazard is unbounded and every draw terminates.  t may be (n,) or a
    per-record grid (n, m).
    """
    t = np.asarray(t, dtype=float)
    g1 = x[:, 0] + 2.0 * x[:, 1]
    g2 = 0.5 * (x[:, 2] + 1.0)
    if t.ndim == 2:
        return g1[:, None] + g2[:, None] * t
    return g1 + g2 * t


def _cumhaz(t, x, lambda0, g, max_nodes=32768, rtol=1e-8):
    """Integral of lambda0 exp(g(s, x)) over [0, t] per record.

    Composite trapezoid with node doubling; each record drops out of the
    refinement as soon as its own estimate stabilizes.
    """
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape[0])
    active = np.arange(t.shape[0])
    prev = None
    m = 16
    while True:
        s = np.linspace(0.0, 1.0, m + 1)[None, :] * t[active, None]
        f = lambda0 * np.exp(g(s, x[active]))
        if not np.all(np.isfinite(f)):
            raise FloatingPointError("non-finite hazard during inversion")
        est = (0.5 * (f[:, 0] + f[:, -1]) + f[:, 1:-1].sum(axis=1)) \
            * (t[active] / m)
        if prev is not None:
            done = np.abs(est - prev) <= rtol * (1.0 + np.abs(est))
            if m >= max_nodes:
                done |= True
            out[active[done]] = est[done]
            active = active[~done]
            est = est[~done]
            if active.size == 0:
                return out
        prev = est
        m *= 2


def gen_nlnph(n: int, lambda0: float = 0.02, g_spec=None, seed: int = 0,
              censor_prob: float = 0.5) -> Dataset:
    """Non-proportional-hazards sample via cumulative-hazard inversion.

    The event time solves integral_0^T lambda0 exp(g(s, x)) ds = -log(U),
    found by bracket growth plus bisection; each draw's residual is kept
    below 1e-6.  g_spec is a callable g(t, x) -> array over records and
    defaults to default_nlnph_g.  Censoring follows the illustrative scheme:
    records selected with probability censor_prob draw tau ~ U(0, max T).
    """
    if n <= 0:
        raise ValueError("n must be positive")
    if lambda0 <= 0.0:
        raise ValueError("lambda0 must be positive")
    if not 0.0 <= censor_prob <= 1.0:
        raise ValueError("censor_prob must be in [0, 1]")
    g = g_spec if g_spec is not None else default_nlnph_g
    rng = np.random.default_rng(seed)
    t = np.empty(n)
    x = np.empty((n, _COX_P))
    chunk = 2048
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        x[start:stop] = rng.uniform(-1.0, 1.0, size=(stop - start, _COX_P))
        target = -np.log(rng.uniform(size=stop - start))
        t[start:stop] = _invert_cumhaz(target, x[start:stop], lambda0, g)
    t_star = t.copy()
    if censor_prob > 0.0:
        selected = rng.uniform(size=n) < censor_prob
        tau = rng.uniform(0.0, t.max(), size=n)
        t_star = np.where(selected, np.minimum(t, tau), t)
    d = (t_star == t).astype(np.int64)
    return Dataset(x, t_star, d, t)


def _invert_cumhaz(target, x, lambda0, g):
    hi = np.ones_like(target)
    active = np.arange(target.shape[0])
    for _ in range(200):
        if active.size == 0:
            break
        vals = _cumhaz(hi[active], x[active], lambda0, g)
        short = vals < target[active]
        hi[active[short]] *= 2.0
        active = active[short]
    else:
        raise FloatingPointError("cumulative hazard failed to bracket target")
    lo = np.zeros_like(target)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        vals = _cumhaz(mid, x, lambda0, g)
        under = vals < target
        lo = np.where(under, mid, lo)
        hi = np.where(under, hi, mid)
        if np.all((hi - lo) <= 1e-10 * np.maximum(1.0, hi)):
            break
    t = 0.5 * (lo + hi)
    resid = np.abs(_cumhaz(t, x, lambda0, g) - target)
    if np.any(resid > 1e-6):
        raise FloatingPointError("cumulative-hazard inversion residual too large")
    return t
