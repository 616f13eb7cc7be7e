"""Training loop: Adam, plateau learning-rate decay, early stopping.

The optimizer minimizes the torch mirror of the total cost on the training
fold; the validation fold is scored without penalties.  The parameters
returned are the ones with the best recorded validation cost.
"""

from __future__ import annotations

import csv
import dataclasses
import time
from dataclasses import dataclass, field

import numpy as np
import torch

from .data import Dataset
from .loss import LossHyper, data_to_tensors, params_to_tensors, torch_cost, total_cost
from .model import ModelParams, Standardizer, init_params


class TrainingDivergedError(RuntimeError):
    """Cost became non-finite during optimization."""


@dataclass(frozen=True)
class TrainConfig:
    """Training settings; the defaults are the reference protocol."""

    k: int = 40
    epochs: int = 500
    lr: float = 0.1
    lr_plateau_patience: int = 100
    lr_decay: float = 0.1
    early_stop_patience: int = 20
    eta: float = 0.1
    eps_rel: float = 1e-4
    xi: float = 0.0
    rho: float = 0.0
    seed: int = 0
    batch: int | str = "full"

    def __post_init__(self):
        if self.k <= 0 or self.epochs <= 0:
            raise ValueError("k and epochs must be positive")
        if self.lr <= 0.0:
            raise ValueError("lr must be positive")
        if self.lr_plateau_patience <= 0 or self.early_stop_patience <= 0:
            raise ValueError("patience values must be positive")
        if not 0.0 < self.lr_decay <= 1.0:
            raise ValueError("lr_decay must lie in (0, 1]")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")
        if self.eps_rel <= 0.0:
            raise ValueError("eps_rel must be positive")
        if self.xi < 0.0 or self.rho < 0.0:
            raise ValueError("penalty weights must be >= 0")
        if self.batch != "full" and (not isinstance(self.batch, int)
                                     or self.batch <= 0):
            raise ValueError("batch must be 'full' or a positive int")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class TrainHistory:
    """Per-epoch record of the run."""

    epoch: list[int] = field(default_factory=list)
    train_cost: list[float] = field(default_factory=list)
    val_cost: list[float] = field(default_factory=list)
    lr: list[float] = field(default_factory=list)
    wall_time: list[float] = field(default_factory=list)

    def append(self, epoch, train_cost, val_cost, lr, wall_time):
        self.epoch.append(int(epoch))
        self.train_cost.append(float(train_cost))
        self.val_cost.append(float(val_cost))
        self.lr.append(float(lr))
        self.wall_time.append(float(wall_time))

    def __len__(self) -> int:
        return len(self.epoch)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "train_cost", "val_cost", "lr"])
            for i in range(len(self.epoch)):
                writer.writerow([self.epoch[i], repr(self.train_cost[i]),
                                 repr(self.val_cost[i]), repr(self.lr[i])])


def split_dataset(data: Dataset, fractions=(0.6, 0.2, 0.2), seed: int = 0):
    """Shuffled disjoint (train, val, test) split covering every record."""
    if len(fractions) != 3:
        raise ValueError("fractions must have three entries")
    if any(f < 0.0 for f in fractions):
        raise ValueError("fractions must be nonnegative")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError("fractions must sum to 1")
    n = len(data)
    if n < 5:
        raise ValueError("n too small to split")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_train = int(np.floor(fractions[0] * n))
    n_val = int(np.floor(fractions[1] * n))
    idx_train = perm[:n_train]
    idx_val = perm[n_train:n_train + n_val]
    idx_test = perm[n_train + n_val:]
    return data.subset(idx_train), data.subset(idx_val), data.subset(idx_test)


def make_hyper(cfg: TrainConfig, std: Standardizer) -> LossHyper:
    """Loss hyperparameters with the interval half-width scaled to the data."""
    return LossHyper(eta=cfg.eta, eps=cfg.eps_rel * std.y_sd,
                     xi=cfg.xi, rho=cfg.rho)


def evaluate_cost(m: ModelParams, s: Standardizer, data: Dataset,
                  h: LossHyper) -> float:
    """total_cost without the penalty terms; used for validation scoring."""
    return total_cost(m, s, data, dataclasses.replace(h, xi=0.0, rho=0.0))


def train(data_train: Dataset, data_val: Dataset, cfg: TrainConfig):
    """Fit the network; returns (params, standardizer, history).

    The returned parameters are the snapshot with the lowest validation
    cost over the recorded epochs.  Raises TrainingDivergedError if the
    cost stops being finite.
    """
    params0, std = init_params(data_train, cfg.k, cfg.seed)
    hyper = make_hyper(cfg, std)
    hyper_val = dataclasses.replace(hyper, xi=0.0, rho=0.0)

    ts = params_to_tensors(params0, requires_grad=True)
    order = ("prototypes", "gamma", "beta", "beta0", "log_sigma2", "log_h")
    tensors = [ts[name] for name in order]
    opt = torch.optim.Adam(tensors, lr=cfg.lr, betas=(0.9, 0.999), eps=1e-8)

    x_tr, y_tr, d_tr = data_to_tensors(std, data_train)
    x_va, y_va, d_va = data_to_tensors(std, data_val)
    n = x_tr.shape[0]
    rng = np.random.default_rng(cfg.seed)

    def full_cost(x, y, d, h):
        with torch.no_grad():
            return float(torch_cost(*tensors, x, y, d, h))

    lr_now = cfg.lr
    best_val = np.inf
    best_snapshot = None
    best_train = np.inf
    plateau = 0
    stall = 0
    history = TrainHistory()
    t0 = time.perf_counter()

    for epoch in range(cfg.epochs):
        if cfg.batch == "full":
            batches = [slice(0, n)]
        else:
            perm = torch.from_numpy(rng.permutation(n))
            batches = [perm[i:i + cfg.batch] for i in range(0, n, cfg.batch)]
        for b in batches:
            opt.zero_grad()
            cost = torch_cost(*tensors, x_tr[b], y_tr[b], d_tr[b], hyper)
            if not torch.isfinite(cost):
                raise TrainingDivergedError(
                    f"non-finite cost at epoch {epoch} (lr={lr_now:g})")
            cost.backward()
            opt.step()

        tc = full_cost(x_tr, y_tr, d_tr, hyper)
        vc = full_cost(x_va, y_va, d_va, hyper_val)
        if not (np.isfinite(tc) and np.isfinite(vc)):
            raise TrainingDivergedError(
                f"non-finite cost at epoch {epoch} (lr={lr_now:g})")
        history.append(epoch, tc, vc, lr_now, time.perf_counter() - t0)

        if vc < best_val:
            best_val = vc
            best_snapshot = [t.detach().numpy().copy() for t in tensors]
            stall = 0
        else:
            stall += 1
            if stall >= cfg.early_stop_patience:
                break

        if tc < best_train:
            best_train = tc
            plateau = 0
        else:
            plateau += 1
            if plateau >= cfg.lr_plateau_patience:
                lr_now *= cfg.lr_decay
                for group in opt.param_groups:
                    group["lr"] = lr_now
                plateau = 0

    arrays = best_snapshot if best_snapshot is not None \
        else [t.detach().numpy().copy() for t in tensors]
    params = ModelParams(*arrays)
    return params, std, history
