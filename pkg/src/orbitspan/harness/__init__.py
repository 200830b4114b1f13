"""Declarative experiments, persistence and the command line."""
from .config import OUT_ENV, ConfigError, ExperimentConfig
from .chart import emit_chart, render_chart
from .runner import CSV_COLUMNS, BudgetExceeded, RunResult, build_sample, build_system, run_experiment
from .suite import CheckResult, run_suite

__all__ = ["OUT_ENV", "ConfigError", "ExperimentConfig", "emit_chart", "render_chart", "CSV_COLUMNS",
           "BudgetExceeded", "RunResult", "build_sample", "build_system", "run_experiment",
           "CheckResult", "run_suite"]
