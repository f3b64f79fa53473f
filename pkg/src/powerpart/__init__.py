"""Partitions into perfect k-th powers: exact counts, asymptotic estimates and circle-method diagnostics."""

from __future__ import annotations

from .coefficients import c1_closed_form, compute_c, compute_c_tilde, compute_d, series_coefficients
from .counting import CountTable, count, count_table, log_count
from .errors import PowerPartError, PreconditionError, ResourceError, SolverError, VerificationError
from .estimator import Estimate, SaddleParams, estimate_log_diff, estimate_log_p, hardy_ramanujan_constant, solve_saddle
from .expsums import GapReport, gap_scan, s_k, singular_series, singular_sum
from .phi import ArcPoint, PhiValue, classify_arc, major_arc_approx, minor_arc_diagnostic, phi_direct, xi_approx
from .report import ReportRow, SweepConfig, run_sweep, verify_all

__version__ = "0.1.0"

__all__ = [
    "ArcPoint", "CountTable", "Estimate", "GapReport", "PhiValue", "PowerPartError", "PreconditionError",
    "ReportRow", "ResourceError", "SaddleParams", "SolverError", "SweepConfig", "VerificationError",
    "c1_closed_form", "classify_arc", "compute_c", "compute_c_tilde", "compute_d", "count", "count_table",
    "estimate_log_diff", "estimate_log_p", "gap_scan", "hardy_ramanujan_constant", "log_count",
    "major_arc_approx", "minor_arc_diagnostic", "phi_direct", "run_sweep", "s_k", "series_coefficients",
    "singular_series", "singular_sum", "solve_saddle", "verify_all", "xi_approx",
]
