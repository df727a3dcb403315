"""Experiment harness: configs, experiments, reporting and the CLI."""

from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .experiments import (
    DegenerateFitError,
    ExponentFit,
    bandlimited_comparison,
    counterexample_report,
    default_config,
    deformation_error_curve,
    feature_stability_curve,
    fit_decay_exponent,
    run_experiment,
    sharpness_report,
    smooth_class_report,
    stability_report,
)
from .cli import main, run

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "DegenerateFitError",
    "ExponentFit",
    "bandlimited_comparison",
    "counterexample_report",
    "default_config",
    "deformation_error_curve",
    "feature_stability_curve",
    "fit_decay_exponent",
    "run_experiment",
    "sharpness_report",
    "smooth_class_report",
    "stability_report",
    "main",
    "run",
]
