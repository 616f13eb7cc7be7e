"""Prototype-based evidential regression network for log durations.

Each of K prototypes looks at a standardized input x through an RBF
similarity s_k(x) = exp(-gamma_k^2 ||x - p_k||^2) and contributes a piece of
evidence about y = log T: a Gaussian random fuzzy number with mean
beta_k0 + beta_k. x, variance sigma2_k, and precision s_k(x) h_k.  The
pieces fuse by the unnormalized combination rule, which has the closed form

    h(x)      = sum_k s_k h_k
    mu(x)     = sum_k s_k h_k mu_k(x) / h(x)
    sigma2(x) = sum_k (s_k h_k)^2 sigma2_k / h(x)^2

Survival bounds at time t are the belief and plausibility of [log t, inf)
under the fused number.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import grfn
from .data import Dataset

_MODEL_FORMAT = "evsurv-model"
_MODEL_VERSION = 1
# below this total precision the fused number is reported as vacuous
_H_FLOOR = 1e-300


class ModelFileError(ValueError):
    """Raised when a model file cannot be loaded."""


class MalformedModelError(ModelFileError):
    pass


class UnsupportedVersionError(ModelFileError):
    pass


@dataclass
class Standardizer:
    """Feature z-scoring plus the response scale used for the loss width.

    The response y = log t stays unstandardized; y_sd is kept so the loss
    half-width can be expressed relative to the spread of the target.
    """

    x_mean: np.ndarray
    x_scale: np.ndarray
    y_sd: float

    def __post_init__(self):
        self.x_mean = np.asarray(self.x_mean, dtype=float)
        self.x_scale = np.asarray(self.x_scale, dtype=float)
        if self.x_mean.shape != self.x_scale.shape:
            raise ValueError("x_mean and x_scale shapes disagree")
        if np.any(self.x_scale <= 0.0):
            raise ValueError("x_scale entries must be positive")
        if not self.y_sd > 0.0:
            raise ValueError("y_sd must be positive")

    def transform(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.shape[-1] != self.x_mean.shape[0]:
            raise ValueError(
                f"expected {self.x_mean.shape[0]} features, got {x.shape[-1]}")
        return (x - self.x_mean) / self.x_scale

    @staticmethod
    def fit(data: Dataset) -> "Standardizer":
        x = data.x
        mean = x.mean(axis=0)
        scale = x.std(axis=0)
        scale = np.where(scale < 1e-12, 1.0, scale)
        y = np.log(data.t_star)
        y_sd = float(y.std(ddof=1)) if len(y) > 1 else 0.0
        return Standardizer(mean, scale, max(y_sd, 1e-12))


@dataclass
class ModelParams:
    """Trainable parameters; gamma is stored raw and used squared, the
    per-prototype variance and precision are stored on the log scale."""

    prototypes: np.ndarray   # (K, p)
    gamma: np.ndarray        # (K,)
    beta: np.ndarray         # (K, p)
    beta0: np.ndarray        # (K,)
    log_sigma2: np.ndarray   # (K,)
    log_h: np.ndarray        # (K,)

    def __post_init__(self):
        self.prototypes = np.asarray(self.prototypes, dtype=float)
        if self.prototypes.ndim != 2:
            raise ValueError("prototypes must be a (K, p) array")
        k, p = self.prototypes.shape
        for name in ("gamma", "beta0", "log_sigma2", "log_h"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (k,):
                raise ValueError(f"{name} must have shape ({k},)")
            setattr(self, name, arr)
        self.beta = np.asarray(self.beta, dtype=float)
        if self.beta.shape != (k, p):
            raise ValueError(f"beta must have shape ({k}, {p})")

    @property
    def k(self) -> int:
        return self.prototypes.shape[0]

    @property
    def p(self) -> int:
        return self.prototypes.shape[1]

    def copy(self) -> "ModelParams":
        return ModelParams(self.prototypes.copy(), self.gamma.copy(),
                           self.beta.copy(), self.beta0.copy(),
                           self.log_sigma2.copy(), self.log_h.copy())


@dataclass(frozen=True)
class Prediction:
    """Fused output for one input."""

    grfn: grfn.GRFN
    most_plausible_time: float
    is_vacuous: bool


def rbf_similarities(m: ModelParams, x: np.ndarray) -> np.ndarray:
    """Per-prototype similarities for one standardized input, shape (K,)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != m.p:
        raise ValueError(f"expected {m.p} features, got {x.shape[0]}")
    d2 = ((x[None, :] - m.prototypes) ** 2).sum(axis=1)
    return np.exp(-(m.gamma ** 2) * d2)


def evidence_grfn(m: ModelParams, x: np.ndarray, k: int) -> grfn.GRFN:
    """Evidence contributed by prototype k for one standardized input."""
    if not 0 <= k < m.k:
        raise IndexError(f"prototype index {k} out of range")
    s = rbf_similarities(m, x)
    x = np.asarray(x, dtype=float).reshape(-1)
    mu_k = float(m.beta[k] @ x + m.beta0[k])
    return grfn.GRFN(mu_k, float(np.exp(m.log_sigma2[k])),
                     float(s[k] * np.exp(m.log_h[k])))


def fused_params(m: ModelParams, x_std: np.ndarray):
    """Closed-form fusion over prototypes for a standardized batch.

    Args:
        x_std: (n, p) standardized features.
    Returns:
        (mu, sigma2, h) arrays of shape (n,).
    """
    x_std = np.asarray(x_std, dtype=float)
    if x_std.ndim == 1:
        x_std = x_std[None, :]
    if x_std.shape[1] != m.p:
        raise ValueError(f"expected {m.p} features, got {x_std.shape[1]}")
    d2 = ((x_std[:, None, :] - m.prototypes[None, :, :]) ** 2).sum(axis=2)
    s = np.exp(-(m.gamma ** 2)[None, :] * d2)
    hk = np.exp(m.log_h)
    s2k = np.exp(m.log_sigma2)
    w = s * hk[None, :]
    hsum = w.sum(axis=1)
    wn = w / np.maximum(hsum, _H_FLOOR)[:, None]
    mu_k = x_std @ m.beta.T + m.beta0[None, :]
    mu = (wn * mu_k).sum(axis=1)
    sigma2 = (wn * wn * s2k[None, :]).sum(axis=1)
    return mu, sigma2, hsum


def forward(m: ModelParams, s: Standardizer, x: np.ndarray) -> Prediction:
    """Predict the fused number for one raw input."""
    x_std = s.transform(np.asarray(x, dtype=float).reshape(1, -1))
    mu, sigma2, h = fused_params(m, x_std)
    vacuous = bool(h[0] <= _H_FLOOR)
    g = grfn.GRFN(float(mu[0]), float(sigma2[0]), float(h[0]))
    return Prediction(g, math.exp(float(mu[0])), vacuous)


def survival_bounds(m: ModelParams, s: Standardizer, x: np.ndarray,
                    t: float):
    """Lower and upper survival values at time t for one raw input.

    Returns (bel, pl) of the duration exceeding t,
    i.e. of [log t, inf) under the fused number.
    """
    if not t > 0.0:
        raise ValueError("t must be positive")
    pred = forward(m, s, x)
    g = pred.grfn
    return grfn._bel_pl(g, grfn.Interval(math.log(t), math.inf))


def survival_bounds_grid(m: ModelParams, s: Standardizer, x: np.ndarray,
                         times: np.ndarray):
    """Vectorized survival bounds: (lower, upper) arrays of shape (n, G)."""
    times = np.asarray(times, dtype=float)
    if np.any(times <= 0.0):
        raise ValueError("times must be positive")
    x_std = s.transform(x)
    mu, sigma2, h = fused_params(m, x_std)
    log_t = np.log(times)[None, :]
    return grfn._upper_ray_measures(mu[:, None], sigma2[:, None],
                                    h[:, None], log_t)


def _kmeans(x: np.ndarray, k: int, rng: np.random.Generator,
            n_iter: int = 50) -> np.ndarray:
    """Plain k-means with k-means++ seeding; deterministic given rng."""
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    d2 = ((x - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            centers[j] = x[rng.integers(n)]
        else:
            centers[j] = x[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, ((x - centers[j]) ** 2).sum(axis=1))
    for _ in range(n_iter):
        dist = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        assign = dist.argmin(axis=1)
        new_centers = centers.copy()
        for j in range(k):
            mask = assign == j
            if mask.any():
                new_centers[j] = x[mask].mean(axis=0)
            else:
                new_centers[j] = x[rng.integers(n)]
        if np.allclose(new_centers, centers, rtol=0.0, atol=0.0):
            break
        centers = new_centers
    return centers


def init_params(data: Dataset, k: int, seed: int):
    """Initial parameters and standardizer fitted on the training data.

    Prototypes come from k-means on the standardized features; every gamma
    starts at the reciprocal of the median pairwise prototype distance; the
    regression part starts flat at the mean log duration with the empirical
    variance and unit precision.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    if k > len(data):
        raise ValueError(f"k={k} exceeds the {len(data)} training records")
    std = Standardizer.fit(data)
    x_std = std.transform(data.x)
    rng = np.random.default_rng(seed)
    prototypes = _kmeans(x_std, k, rng)
    if k >= 2:
        diffs = prototypes[:, None, :] - prototypes[None, :, :]
        dist = np.sqrt((diffs ** 2).sum(axis=2))
        med = float(np.median(dist[np.triu_indices(k, 1)]))
    else:
        med = 0.0
    gamma0 = 1.0 / med if med > 0.0 else 1.0
    y = np.log(data.t_star)
    var_y = float(y.var(ddof=1)) if len(y) > 1 else 0.0
    params = ModelParams(
        prototypes=prototypes,
        gamma=np.full(k, gamma0),
        beta=np.zeros((k, data.p)),
        beta0=np.full(k, float(y.mean())),
        log_sigma2=np.full(k, math.log(max(var_y, 1e-12))),
        log_h=np.zeros(k),
    )
    return params, std


def save_model(m: ModelParams, s: Standardizer, path,
               config: dict | None = None) -> None:
    """Write a self-describing JSON model file; floats round-trip exactly."""
    doc = {
        "format": _MODEL_FORMAT,
        "version": _MODEL_VERSION,
        "k": m.k,
        "p": m.p,
        "prototypes": m.prototypes.tolist(),
        "gamma": m.gamma.tolist(),
        "beta": m.beta.tolist(),
        "beta0": m.beta0.tolist(),
        "log_sigma2": m.log_sigma2.tolist(),
        "log_h": m.log_h.tolist(),
        "standardizer": {
            "x_mean": s.x_mean.tolist(),
            "x_scale": s.x_scale.tolist(),
            "y_sd": s.y_sd,
        },
        "config": config,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_model(path):
    """Read a model file; returns (ModelParams, Standardizer)."""
    try:
        with open(path, "r") as fh:
            doc = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedModelError(f"malformed model file: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != _MODEL_FORMAT:
        raise MalformedModelError("malformed model file: wrong format tag")
    if doc.get("version") != _MODEL_VERSION:
        raise UnsupportedVersionError(
            f"unsupported version: {doc.get('version')!r}")
    try:
        params = ModelParams(
            prototypes=np.array(doc["prototypes"], dtype=float),
            gamma=np.array(doc["gamma"], dtype=float),
            beta=np.array(doc["beta"], dtype=float),
            beta0=np.array(doc["beta0"], dtype=float),
            log_sigma2=np.array(doc["log_sigma2"], dtype=float),
            log_h=np.array(doc["log_h"], dtype=float),
        )
        sd = doc["standardizer"]
        std = Standardizer(np.array(sd["x_mean"], dtype=float),
                           np.array(sd["x_scale"], dtype=float),
                           float(sd["y_sd"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedModelError(f"malformed model file: {exc}") from None
    if params.k != doc.get("k") or params.p != doc.get("p"):
        raise MalformedModelError("malformed model file: shape mismatch")
    return params, std
