"""Runnable inequality checks, sharpness sweeps and their reports."""

from .checks import (RECIPES, CheckId, list_checks, resolve_params, run_catalog, run_check)
from .coeffs import a_coeffs, growth_profile
from .context import Context
from .fitting import TailSum, fit_exponent, tail_sum
from .report import CSV_HEADER, CheckReport
from .sharpness import SharpnessKind, prediction, sharpness_sweep

__all__ = ["RECIPES", "CheckId", "list_checks", "resolve_params", "run_catalog", "run_check",
           "a_coeffs", "growth_profile", "Context", "TailSum", "fit_exponent", "tail_sum",
           "CSV_HEADER", "CheckReport", "SharpnessKind", "prediction", "sharpness_sweep"]
