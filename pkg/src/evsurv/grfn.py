"""Belief calculus for Gaussian random fuzzy numbers.

A Gaussian random fuzzy number (GRFN) couples a Gaussian fuzzy set
exp(-h (x - m)^2 / 2) with a Gaussian random mode M ~ N(mu, sigma2).  It
carries both aleatory spread (sigma2) and epistemic precision (h): h -> inf
recovers an ordinary Gaussian random variable, sigma2 = 0 recovers a
possibility distribution, and h = 0 is the vacuous state of total ignorance.

This module provides the closed-form belief and plausibility of real
intervals, the unnormalized product combination rule, belief prediction
intervals, a log-scale wrapper for positive durations, and a Monte-Carlo
oracle used to validate the closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf, erfc

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# width below which Phi(b) - Phi(a) switches to the midpoint expansion
_PHI_DIFF_SMALL = 1e-6
# variance floor used only to keep array formulas finite; the scalar API
# routes sigma2 == 0 through the explicit possibilistic limit instead
_VAR_FLOOR = 1e-300


class UnreachableBeliefError(ValueError):
    """Requested belief level exceeds what the number can assign."""


def _phi(z):
    """Standard normal cdf, evaluated through erfc to keep tail precision."""
    return 0.5 * erfc(-np.asarray(z, dtype=float) / _SQRT2)


def _phi_c(z):
    """Standard normal survival function 1 - Phi(z)."""
    return 0.5 * erfc(np.asarray(z, dtype=float) / _SQRT2)


def _phi_diff(a, b):
    """Phi(b) - Phi(a) for b >= a without catastrophic cancellation.

    Nearby arguments use a midpoint expansion of the integral of the normal
    density; same-sign arguments use erfc so the subtraction happens between
    tail values of comparable size; arguments straddling zero add two erf
    values of the same sign.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    delta = b - a
    small = delta < _PHI_DIFF_SMALL
    pos = (a >= 0.0) & ~small
    neg = (b <= 0.0) & ~small
    straddle = ~(small | pos | neg)

    # every branch is evaluated on masked inputs so no branch can emit
    # non-finite values that would poison the selected output
    m = np.where(small, 0.5 * (a + b), 0.0)
    d = np.where(small, delta, 0.0)
    val_small = d * _INV_SQRT_2PI * np.exp(-0.5 * m * m) \
        * (1.0 + d * d * (m * m - 1.0) / 24.0)

    ap = np.where(pos, a, 0.0)
    bp = np.where(pos, b, 0.0)
    val_pos = 0.5 * (erfc(ap / _SQRT2) - erfc(bp / _SQRT2))

    an = np.where(neg, a, 0.0)
    bn = np.where(neg, b, 0.0)
    val_neg = 0.5 * (erfc(-bn / _SQRT2) - erfc(-an / _SQRT2))

    asr = np.where(straddle, a, 0.0)
    bsr = np.where(straddle, b, 0.0)
    val_str = 0.5 * (erf(bsr / _SQRT2) + erf(-asr / _SQRT2))

    out = np.where(small, val_small,
                   np.where(pos, val_pos, np.where(neg, val_neg, val_str)))
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class Interval:
    """Closed real interval; lo and hi may be -inf / +inf."""

    lo: float
    hi: float

    def __post_init__(self):
        lo = float(self.lo)
        hi = float(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval endpoints must not be NaN")
        if lo > hi:
            raise ValueError(f"empty interval: lo={lo} > hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def is_full_line(self) -> bool:
        return math.isinf(self.lo) and math.isinf(self.hi)


@dataclass(frozen=True)
class GFN:
    """Gaussian fuzzy number with membership exp(-h (x - m)^2 / 2)."""

    m: float
    h: float

    def __post_init__(self):
        if not math.isfinite(self.m):
            raise ValueError("GFN mode must be finite")
        if not (math.isfinite(self.h) and self.h >= 0.0):
            raise ValueError("GFN precision h must be finite and >= 0")

    @property
    def is_vacuous(self) -> bool:
        return self.h == 0.0

    def membership(self, x: float) -> float:
        return math.exp(-0.5 * self.h * (x - self.m) ** 2)


@dataclass(frozen=True)
class GRFN:
    """Gaussian random fuzzy number with mode ~ N(mu, sigma2), precision h."""

    mu: float
    sigma2: float
    h: float

    def __post_init__(self):
        if not math.isfinite(self.mu):
            raise ValueError("mu must be finite")
        if not (math.isfinite(self.sigma2) and self.sigma2 >= 0.0):
            raise ValueError("sigma2 must be finite and >= 0")
        if not (math.isfinite(self.h) and self.h >= 0.0):
            raise ValueError("h must be finite and >= 0")

    @property
    def is_vacuous(self) -> bool:
        return self.h == 0.0

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)


@dataclass(frozen=True)
class LognormalRFN:
    """Random fuzzy number on positive durations: log T described by `base`."""

    base: GRFN


def contour(g: GRFN, x: float) -> float:
    """Plausibility of the single point x (the contour function).

    pl(x) = (1 + h sigma2)^(-1/2) exp(-h (x - mu)^2 / (2 (1 + h sigma2))).
    """
    c2 = 1.0 + g.h * g.sigma2
    return math.exp(-g.h * (x - g.mu) ** 2 / (2.0 * c2)) / math.sqrt(c2)


def _possibilistic_bel_pl(g: GRFN, iv: Interval):
    # sigma2 == 0: the mode is deterministic, so belief and plausibility are
    # the necessity and possibility of the interval under GFN(mu, h)
    mem = GFN(g.mu, g.h).membership
    lo, hi = iv.lo, iv.hi
    if iv.is_full_line:
        return 1.0, 1.0
    if math.isinf(lo):
        if g.mu <= hi:
            return 1.0 - mem(hi), 1.0
        return 0.0, mem(hi)
    if math.isinf(hi):
        if g.mu >= lo:
            return 1.0 - mem(lo), 1.0
        return 0.0, mem(lo)
    if lo <= g.mu <= hi:
        return 1.0 - max(mem(lo), mem(hi)), 1.0
    nearest = lo if g.mu < lo else hi
    return 0.0, mem(nearest)


def _upper_ray_measures(mu, var, h, x):
    """(bel, pl) of [x, inf) from fused parameter arrays; broadcasts."""
    mu = np.asarray(mu, dtype=float)
    var = np.asarray(var, dtype=float)
    h = np.asarray(h, dtype=float)
    x = np.asarray(x, dtype=float)
    sig = np.sqrt(np.maximum(var, _VAR_FLOOR))
    c2 = 1.0 + h * var
    c = np.sqrt(c2)
    z = x - mu
    u0 = z / sig
    u1 = z / (sig * c)
    pl_x = np.exp(-h * z * z / (2.0 * c2)) / c
    bel = _phi_c(u0) - pl_x * _phi_c(u1)
    pl = _phi_c(u0) + pl_x * _phi(u1)
    return np.clip(bel, 0.0, 1.0), np.clip(pl, 0.0, 1.0)


def _lower_ray_measures(mu, var, h, y):
    """(bel, pl) of (-inf, y]; reflection of the upper-ray formulas."""
    return _upper_ray_measures(-np.asarray(mu, float), var, h, -np.asarray(y, float))


def _bounded_measures(mu, var, h, lo, hi):
    """(bel, pl) of the bounded interval [lo, hi]; broadcasts."""
    mu = np.asarray(mu, dtype=float)
    var = np.asarray(var, dtype=float)
    h = np.asarray(h, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    sig = np.sqrt(np.maximum(var, _VAR_FLOOR))
    c2 = 1.0 + h * var
    c = np.sqrt(c2)
    sp = sig * c
    u0 = (lo - mu) / sig
    v0 = (hi - mu) / sig
    u1 = (lo - mu) / sp
    v1 = (hi - mu) / sp
    mid = 0.5 * (lo + hi) - mu
    spread = 0.5 * (hi - lo) * h * var
    a1 = (mid + spread) / sp
    b0 = (mid - spread) / sp
    pl_lo = np.exp(-h * (lo - mu) ** 2 / (2.0 * c2)) / c
    pl_hi = np.exp(-h * (hi - mu) ** 2 / (2.0 * c2)) / c
    base = _phi_diff(u0, v0)
    bel = base - pl_lo * _phi_diff(u1, a1) - pl_hi * _phi_diff(b0, v1)
    pl = base + pl_lo * _phi(u1) + pl_hi * _phi_c(v1)
    return np.clip(bel, 0.0, 1.0), np.clip(pl, 0.0, 1.0)


def _bel_pl(g: GRFN, iv: Interval):
    if iv.is_full_line:
        return 1.0, 1.0
    if g.sigma2 == 0.0:
        return _possibilistic_bel_pl(g, iv)
    if g.h == 0.0:
        # vacuous: no proper subset earns belief, every one stays plausible
        return 0.0, 1.0
    if math.isinf(iv.lo):
        bel, pl = _lower_ray_measures(g.mu, g.sigma2, g.h, iv.hi)
    elif math.isinf(iv.hi):
        bel, pl = _upper_ray_measures(g.mu, g.sigma2, g.h, iv.lo)
    else:
        bel, pl = _bounded_measures(g.mu, g.sigma2, g.h, iv.lo, iv.hi)
    return float(bel), float(pl)


def bel_interval(g: GRFN, iv: Interval) -> float:
    """Degree of belief assigned to the interval."""
    return _bel_pl(g, iv)[0]


def pl_interval(g: GRFN, iv: Interval) -> float:
    """Plausibility of the interval; always >= bel_interval."""
    return _bel_pl(g, iv)[1]


def gfn_product(a: GFN, b: GFN) -> GFN:
    """Product-intersection of two Gaussian fuzzy numbers.

    Precisions add; the mode is the precision-weighted mean.  Two vacuous
    operands give a vacuous result whose mode is fixed by convention to the
    midpoint of the operand modes.
    """
    ht = a.h + b.h
    if ht == 0.0:
        return GFN(0.5 * (a.m + b.m), 0.0)
    return GFN((a.h * a.m + b.h * b.m) / ht, ht)


def combine_unnormalized(g1: GRFN, g2: GRFN) -> GRFN:
    """Unnormalized combination of two independent GRFNs.

    mu is the precision-weighted mean, sigma2 the matching quadratic form,
    and h the sum of precisions.  A vacuous operand (h = 0) is neutral; two
    vacuous operands give the vacuous result with mu = midpoint, sigma2 = 0.
    """
    ht = g1.h + g2.h
    if ht == 0.0:
        return GRFN(0.5 * (g1.mu + g2.mu), 0.0, 0.0)
    mu = (g1.h * g1.mu + g2.h * g2.mu) / ht
    sigma2 = (g1.h ** 2 * g1.sigma2 + g2.h ** 2 * g2.sigma2) / ht ** 2
    return GRFN(mu, sigma2, ht)


def combine_all(grfns) -> GRFN:
    """Left fold of combine_unnormalized over a non-empty sequence."""
    grfns = list(grfns)
    if not grfns:
        raise ValueError("combine_all requires at least one operand")
    out = grfns[0]
    for g in grfns[1:]:
        out = combine_unnormalized(out, g)
    return out


def bel_pl_time_interval(l: LognormalRFN, t1: float, t2: float):
    """(bel, pl) that a positive duration falls in [t1, t2].

    Durations are carried on the log scale, so this is the belief and
    plausibility of [log t1, log t2] under the base number.
    """
    if not (t1 > 0.0 and t2 > 0.0):
        raise ValueError("time interval endpoints must be positive")
    if t1 > t2:
        raise ValueError("empty time interval")
    lo = math.log(t1)
    hi = math.log(t2) if not math.isinf(t2) else math.inf
    return _bel_pl(l.base, Interval(lo, hi))


def belief_prediction_interval(g: GRFN, alpha: float,
                               tol: float = 1e-9) -> Interval:
    """Smallest centered interval [mu - r, mu + r] carrying belief alpha.

    Solved by geometric bracket growth followed by bisection on r.  Raises
    UnreachableBeliefError when the number cannot assign belief alpha to any
    bounded interval (vacuous input).
    """
    if not (0.0 <= alpha < 1.0):
        raise ValueError("alpha must lie in [0, 1)")
    if alpha == 0.0:
        return Interval(g.mu, g.mu)
    if g.h == 0.0:
        raise UnreachableBeliefError("unreachable belief level: vacuous input")

    def bel_at(r: float) -> float:
        return bel_interval(g, Interval(g.mu - r, g.mu + r))

    r = g.sigma + 1.0 / math.sqrt(g.h)
    hi = r
    reached = False
    for _ in range(200):
        if bel_at(hi) >= alpha:
            reached = True
            break
        hi *= 2.0
    if not reached:
        raise UnreachableBeliefError("unreachable belief level")

    lo = 0.0
    mid = hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        b = bel_at(mid)
        if abs(b - alpha) <= tol:
            break
        if b < alpha:
            lo = mid
        else:
            hi = mid
    return Interval(g.mu - mid, g.mu + mid)


def mc_oracle_bel_pl(g: GRFN, iv: Interval, n: int, seed: int,
                     with_stderr: bool = False):
    """Monte-Carlo estimate of (bel, pl) by sampling the random mode.

    Draws M ~ N(mu, sigma2) and averages the necessity and possibility of
    the interval under GFN(M, h).  Exists to cross-check the closed forms;
    with_stderr=True appends the two standard errors of the means.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    m = g.mu + g.sigma * rng.standard_normal(n)
    lo, hi = iv.lo, iv.hi
    if iv.is_full_line:
        nec = np.ones(n)
        poss = np.ones(n)
    else:
        mem_lo = np.exp(-0.5 * g.h * (lo - m) ** 2) if math.isfinite(lo) else None
        mem_hi = np.exp(-0.5 * g.h * (hi - m) ** 2) if math.isfinite(hi) else None
        if math.isinf(lo):
            inside = m <= hi
            poss = np.where(inside, 1.0, mem_hi)
            nec = np.where(inside, 1.0 - mem_hi, 0.0)
        elif math.isinf(hi):
            inside = m >= lo
            poss = np.where(inside, 1.0, mem_lo)
            nec = np.where(inside, 1.0 - mem_lo, 0.0)
        else:
            inside = (m >= lo) & (m <= hi)
            poss = np.where(inside, 1.0, np.where(m < lo, mem_lo, mem_hi))
            nec = np.where(inside, 1.0 - np.maximum(mem_lo, mem_hi), 0.0)
    bel = float(nec.mean())
    pl = float(poss.mean())
    if not with_stderr:
        return bel, pl
    bel_se = float(nec.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    pl_se = float(poss.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return bel, pl, bel_se, pl_se
