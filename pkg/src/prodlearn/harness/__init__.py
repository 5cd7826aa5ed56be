"""Experiment orchestration, lower-bound families and file formats."""

from .classification import classification_perm_check, labeled_gap_report, sup_hypothesis_gap
from .experiment import ExperimentConfig, SweepRow, loglog_slope, median_regret, run_sweep, sweep_csv
from .lower_bound import FiniteLBInstance, finite_lb_instance, finite_lb_loss, hypothesis_value

__all__ = [
    "ExperimentConfig",
    "FiniteLBInstance",
    "SweepRow",
    "classification_perm_check",
    "finite_lb_instance",
    "finite_lb_loss",
    "hypothesis_value",
    "labeled_gap_report",
    "loglog_slope",
    "median_regret",
    "run_sweep",
    "sup_hypothesis_gap",
    "sweep_csv",
]
