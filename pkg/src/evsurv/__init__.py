"""Evidential time-to-event regression.

Predictions are Gaussian random fuzzy numbers over log event time: each
carries a mode, an imprecision variance and a precision weight, and yields
lower and upper survival bounds instead of a single curve.
"""

from .data import DataFormatError, Dataset, SurvivalRecord, read_csv, write_csv
from .grfn import (GFN, GRFN, Interval, LognormalRFN, UnreachableBeliefError,
                   bel_interval, bel_pl_time_interval,
                   belief_prediction_interval, combine_all,
                   combine_unnormalized, contour, gfn_product,
                   mc_oracle_bel_pl, pl_interval)
from .loss import (LossHyper, ParamGrads, finite_diff_grad, grad_total_cost,
                   instance_loss, total_cost)
from .metrics import (CalibrationCurve, StepFunction, SurvivalGrid,
                      binomial_ll, brier_score, c_index_td, calibration_curve,
                      censoring_survival, integrated_bll, integrated_brier,
                      kaplan_meier, survival_grid)
from .model import (MalformedModelError, ModelFileError, ModelParams,
                    Prediction, Standardizer, UnsupportedVersionError,
                    forward, init_params, load_model, save_model,
                    survival_bounds, survival_bounds_grid)
from .simulate import (default_nlnph_g, gen_cox_exponential, gen_illustrative,
                       gen_nlnph)
from .train import (TrainConfig, TrainHistory, TrainingDivergedError,
                    evaluate_cost, make_hyper, split_dataset, train)

__version__ = "0.1.0"

__all__ = [
    "GFN",
    "GRFN",
    "Interval",
    "LognormalRFN",
    "UnreachableBeliefError",
    "bel_interval",
    "bel_pl_time_interval",
    "belief_prediction_interval",
    "combine_all",
    "combine_unnormalized",
    "contour",
    "gfn_product",
    "mc_oracle_bel_pl",
    "pl_interval",
    "DataFormatError",
    "Dataset",
    "SurvivalRecord",
    "read_csv",
    "write_csv",
    "LossHyper",
    "ParamGrads",
    "finite_diff_grad",
    "grad_total_cost",
    "instance_loss",
    "total_cost",
    "CalibrationCurve",
    "StepFunction",
    "SurvivalGrid",
    "binomial_ll",
    "brier_score",
    "c_index_td",
    "calibration_curve",
    "censoring_survival",
    "integrated_bll",
    "integrated_brier",
    "kaplan_meier",
    "survival_grid",
    "MalformedModelError",
    "ModelFileError",
    "ModelParams",
    "Prediction",
    "Standardizer",
    "UnsupportedVersionError",
    "forward",
    "init_params",
    "load_model",
    "save_model",
    "survival_bounds",
    "survival_bounds_grid",
    "default_nlnph_g",
    "gen_cox_exponential",
    "gen_illustrative",
    "gen_nlnph",
    "TrainConfig",
    "TrainHistory",
    "TrainingDivergedError",
    "evaluate_cost",
    "make_hyper",
    "split_dataset",
    "train",
    "__version__",
]
