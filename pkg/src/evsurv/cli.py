"""Command-line interface: simulate, train, eval, protocol.

Every run finishes by printing a one-line JSON status object to stderr.
Exit codes: 0 success, 2 input or usage error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import metrics as met
from .data import DataFormatError, Dataset, read_csv, write_csv
from .grfn import UnreachableBeliefError
from .model import (ModelFileError, ModelParams, Standardizer, load_model,
                    save_model)
from .simulate import gen_cox_exponential, gen_illustrative, gen_nlnph
from .train import (TrainConfig, TrainingDivergedError, evaluate_cost,
                    make_hyper, split_dataset, train)

_CONFIG_KEYS = ("k", "epochs", "lr", "lr_plateau_patience", "lr_decay",
                "early_stop_patience", "eta", "eps_rel", "xi", "rho",
                "seed", "batch")
_DEFAULT_ALPHAS = np.linspace(0.05, 0.95, 19)
_GRID_POINTS = 100


@dataclass(frozen=True)
class EvalReport:
    """Headline metrics for one evaluation run.

    ibll is reported negated (lower is better), matching the sign of ibs.
    """

    n: int
    censor_rate: float
    mode: str
    t_min: float
    t_max: float
    ctd: float
    ibs: float
    ibll: float
    calibration: met.CalibrationCurve


def _fmt(x) -> str:
    return repr(float(x))


def evaluate(m: ModelParams, s: Standardizer, data: Dataset,
             mode: str = "mid", alphas=_DEFAULT_ALPHAS):
    """Shared evaluation pipeline; returns (report, grids dict)."""
    t_min = float(data.t_star.min())
    t_max = float(data.t_star.max())
    times = np.linspace(t_min, t_max, _GRID_POINTS)
    grids = {name: met.survival_grid(m, s, data, times, name)
             for name in ("lower", "mid", "upper")}
    grid = grids[mode]
    g_cens = met.censoring_survival(data.t_star, data.d)
    ctd = met.c_index_td(grid, data.t_star, data.d)
    ibs = met.integrated_brier(grid, data.t_star, data.d, g_cens, t_min, t_max)
    ibll = -met.integrated_bll(grid, data.t_star, data.d, g_cens, t_min, t_max)
    cal = met.calibration_curve(m, s, data, alphas)
    report = EvalReport(len(data), data.censor_rate, mode, t_min, t_max,
                        ctd, ibs, ibll, cal)
    return report, grids


def _write_report(report: EvalReport, grids, data: Dataset, out_dir) -> list:
    import os
    os.makedirs(out_dir, exist_ok=True)
    paths = []

    path = os.path.join(out_dir, "metrics.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "censor_rate", "mode", "t_min", "t_max",
                    "ctd", "ibs", "ibll"])
        w.writerow([report.n, _fmt(report.censor_rate), report.mode,
                    _fmt(report.t_min), _fmt(report.t_max),
                    _fmt(report.ctd), _fmt(report.ibs), _fmt(report.ibll)])
    paths.append(path)

    path = os.path.join(out_dir, "calibration.csv")
    cal = report.calibration
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha", "coverage_bpi", "coverage_prob"])
        for i in range(cal.alphas.shape[0]):
            w.writerow([_fmt(cal.alphas[i]), _fmt(cal.coverage_bpi[i]),
                        _fmt(cal.coverage_prob[i])])
    paths.append(path)

    path = os.path.join(out_dir, "survival.csv")
    times = grids["mid"].times
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["record", "t", "lower", "mid", "upper"])
        for i in range(len(data)):
            for j in range(times.shape[0]):
                w.writerow([i, _fmt(times[j]),
                            _fmt(grids["lower"].surv[i, j]),
                            _fmt(grids["mid"].surv[i, j]),
                            _fmt(grids["upper"].surv[i, j])])
    paths.append(path)
    return paths


def _write_heatmap(m, s, data: Dataset, feature: str, grid_n: int, out_dir):
    import os
    if feature not in data.feature_names:
        raise DataFormatError(f"unknown heatmap feature: {feature!r}")
    j = data.feature_names.index(feature)
    base = np.median(data.x, axis=0)
    xs = np.linspace(data.x[:, j].min(), data.x[:, j].max(), grid_n)
    times = np.linspace(float(data.t_star.min()), float(data.t_star.max()),
                        grid_n)
    x_sweep = np.tile(base, (grid_n, 1))
    x_sweep[:, j] = xs
    sweep_data = Dataset(x_sweep, np.ones(grid_n), np.ones(grid_n, dtype=int),
                         feature_names=list(data.feature_names))
    lower = met.survival_grid(m, s, sweep_data, times, "lower").surv
    upper = met.survival_grid(m, s, sweep_data, times, "upper").surv
    path = os.path.join(out_dir, "heatmap.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([feature, "t", "lower", "upper"])
        for i in range(grid_n):
            for k in range(grid_n):
                w.writerow([_fmt(xs[i]), _fmt(times[k]),
                            _fmt(lower[i, k]), _fmt(upper[i, k])])
    return path


def cmd_simulate(args) -> list:
    if args.kind == "illustrative":
        data = gen_illustrative(args.n, args.censor, args.seed)
    elif args.kind in ("lph", "nlph"):
        lam = args.lambda0 if args.lambda0 is not None else 0.1
        data = gen_cox_exponential(args.n, args.kind, lam, args.seed)
    elif args.kind == "nlnph":
        lam = args.lambda0 if args.lambda0 is not None else 0.02
        data = gen_nlnph(args.n, lam, None, args.seed, args.censor)
    else:
        raise DataFormatError(f"unknown kind: {args.kind!r}")
    write_csv(data, args.out)
    print(f"wrote {len(data)} records to {args.out} "
          f"(censored {100.0 * data.censor_rate:.1f}%)")
    return [args.out]


def _build_config(args) -> TrainConfig:
    settings = {}
    if args.config is not None:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"malformed config file: {exc}") from None
        if not isinstance(loaded, dict):
            raise DataFormatError("config file must hold a JSON object")
        for key in loaded:
            if key not in _CONFIG_KEYS:
                raise DataFormatError(f"unknown config key: {key!r}")
        settings.update(loaded)
    for key in _CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            settings[key] = val
    if "batch" in settings and settings["batch"] != "full":
        settings["batch"] = int(settings["batch"])
    try:
        return TrainConfig(**settings)
    except (TypeError, ValueError) as exc:
        raise DataFormatError(f"bad training config: {exc}") from None


def cmd_train(args) -> list:
    data = read_csv(args.data)
    cfg = _build_config(args)
    if args.val_data is not None:
        data_train = data
        data_val = read_csv(args.val_data)
    else:
        split_seed = args.split_seed if args.split_seed is not None else cfg.seed
        data_train, data_val, data_test = split_dataset(data, seed=split_seed)
        if args.test_out is not None:
            write_csv(data_test, args.test_out)
    params, std, history = train(data_train, data_val, cfg)
    save_model(params, std, args.model_out, config=cfg.to_dict())
    outputs = [args.model_out]
    if args.history_out is not None:
        history.write_csv(args.history_out)
        outputs.append(args.history_out)
    if args.val_data is None and args.test_out is not None:
        outputs.append(args.test_out)
    hyper = make_hyper(cfg, std)
    final_val = evaluate_cost(params, std, data_val, hyper)
    print(f"trained {len(history)} epochs; best validation cost "
          f"{final_val:.6f}; model written to {args.model_out}")
    return outputs


def cmd_eval(args) -> list:
    params, std = load_model(args.model)
    data = read_csv(args.data)
    alphas = _DEFAULT_ALPHAS
    if args.alphas is not None:
        alphas = np.array([float(a) for a in args.alphas.split(",")])
    report, grids = evaluate(params, std, data, args.mode, alphas)
    outputs = _write_report(report, grids, data, args.out_dir)
    if args.heatmap_feature is not None:
        outputs.append(_write_heatmap(params, std, data, args.heatmap_feature,
                                      args.heatmap_grid, args.out_dir))
    print(f"n={report.n} censored={100.0 * report.censor_rate:.1f}% "
          f"mode={report.mode} ctd={report.ctd:.4f} ibs={report.ibs:.4f} "
          f"ibll={report.ibll:.4f}")
    return outputs


def cmd_protocol(args) -> list:
    import os
    data = read_csv(args.data)
    cfg_base = _build_config(args)
    if args.seeds is not None:
        seeds = [int(s) for s in args.seeds.split(",")]
        if len(seeds) != args.n_splits:
            raise DataFormatError("seeds count must equal n_splits")
    else:
        seeds = list(range(1, args.n_splits + 1))
    if args.n_splits == 1:
        print("warning: single split, standard errors are zero", file=sys.stderr)
    rows = []
    for seed in seeds:
        data_train, data_val, data_test = split_dataset(data, seed=seed)
        cfg = TrainConfig(**{**cfg_base.to_dict(), "seed": seed})
        params, std, _ = train(data_train, data_val, cfg)
        report, _ = evaluate(params, std, data_test, args.mode)
        rows.append((seed, report.ctd, report.ibs, report.ibll))
        print(f"split seed={seed}: ctd={report.ctd:.4f} "
              f"ibs={report.ibs:.4f} ibll={report.ibll:.4f}")
    os.makedirs(args.out_dir, exist_ok=True)
    splits_path = os.path.join(args.out_dir, "splits.csv")
    with open(splits_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["seed", "ctd", "ibs", "ibll"])
        for seed, ctd, ibs, ibll in rows:
            w.writerow([seed, _fmt(ctd), _fmt(ibs), _fmt(ibll)])
    summary_path = os.path.join(args.out_dir, "summary.csv")
    arr = np.array([[r[1], r[2], r[3]] for r in rows])
    means = arr.mean(axis=0)
    if len(rows) > 1:
        ses = arr.std(axis=0, ddof=1) / math.sqrt(len(rows))
    else:
        ses = np.zeros(3)
    with open(summary_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["metric", "mean", "se"])
        for name, mean, se in zip(("ctd", "ibs", "ibll"), means, ses):
            w.writerow([name, _fmt(mean), _fmt(se)])
    for name, mean, se in zip(("ctd", "ibs", "ibll"), means, ses):
        print(f"{name} {mean:.3f}+-{se:.3f}")
    return [splits_path, summary_path]


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="JSON training config")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--lr-plateau-patience", dest="lr_plateau_patience",
                   type=int, default=None)
    p.add_argument("--lr-decay", dest="lr_decay", type=float, default=None)
    p.add_argument("--early-stop-patience", dest="early_stop_patience",
                   type=int, default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--eps-rel", dest="eps_rel", type=float, default=None)
    p.add_argument("--xi", type=float, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--batch", default=None,
                   help="'full' or a positive minibatch size")


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evsurv",
        description="Evidential time-to-event regression")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic dataset")
    p.add_argument("--kind", required=True,
                   choices=("illustrative", "lph", "nlph", "nlnph"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--censor", type=float, default=0.0,
                   help="censoring selection probability "
                        "(illustrative and nlnph kinds)")
    p.add_argument("--lambda0", type=float, default=None,
                   help="baseline hazard; defaults to 0.1 for lph and nlph, "
                        "0.02 for nlnph")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="fit a model on a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--val-data", dest="val_data", default=None,
                   help="pre-split validation set; omit to split --data")
    p.add_argument("--split-seed", dest="split_seed", type=int, default=None)
    p.add_argument("--test-out", dest="test_out", default=None,
                   help="where to write the held-out test fold when splitting")
    p.add_argument("--model-out", dest="model_out", required=True)
    p.add_argument("--history-out", dest="history_out", default=None)
    _add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a model on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--mode", choices=("lower", "mid", "upper"), default="mid")
    p.add_argument("--alphas", default=None,
                   help="comma-separated calibration levels")
    p.add_argument("--heatmap-feature", dest="heatmap_feature", default=None)
    p.add_argument("--heatmap-grid", dest="heatmap_grid", type=int, default=21)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("protocol", help="repeated split/train/eval summary")
    p.add_argument("--data", required=True)
    p.add_argument("--n-splits", dest="n_splits", type=int, default=5)
    p.add_argument("--seeds", default=None,
                   help="comma-separated split seeds, default 1..n_splits")
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--mode", choices=("lower", "mid", "upper"), default="mid")
    _add_train_flags(p)
    p.set_defaults(func=cmd_protocol)
    return parser


def _status(command: str, ok: bool, outputs=None, error: str = "",
            exit_code: int = 0) -> None:
    doc = {"status": "ok" if ok else "error", "command": command}
    if ok:
        doc["outputs"] = outputs or []
    else:
        doc["exit_code"] = exit_code
        doc["error"] = error
    print(json.dumps(doc), file=sys.stderr)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    command = args.command
    try:
        outputs = args.func(args)
    except (TrainingDivergedError, FloatingPointError, OverflowError,
            UnreachableBeliefError) as exc:
        _status(command, False, error=str(exc), exit_code=3)
        return 3
    except (DataFormatError, ModelFileError, OSError, ValueError) as exc:
        _status(command, False, error=str(exc), exit_code=2)
        return 2
    _status(command, True, outputs=outputs)
    return 0


if __name__ == "__main__":
    sys.exit(main())
