"""Ranking and selection with covariates.

Thin wrapper over the C++ core: critical constants for the two-stage
procedures, Monte Carlo experiments on the built-in benchmark problems, and
the synthetic treatment-selection case study.
"""

from ._rscov import (
    benchmark_info,
    case_study,
    chisq_cdf,
    chisq_pdf,
    expected_qalys,
    make_gsc,
    min_order_stat_pdf,
    normal_cdf,
    pcs_bound,
    run_experiment,
    solve_h,
)

__all__ = [
    "benchmark_info",
    "case_study",
    "chisq_cdf",
    "chisq_pdf",
    "expected_qalys",
    "make_gsc",
    "min_order_stat_pdf",
    "normal_cdf",
    "pcs_bound",
    "run_experiment",
    "solve_h",
]
