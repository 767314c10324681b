"""Binomial proportion intervals and training-conditional conformal prediction."""

from ._core import (
    CSV_HEADER,
    IoError,
    clopper_pearson,
    cp_coverage,
    exact_se_probability,
    inp_closed_form,
    inp_contains,
    naive_interval_coverage,
    p_value,
    run_appendix,
    safety_certificate_coverage,
    simulate_appendix,
    theorem1_bound,
)

__all__ = [
    "CSV_HEADER",
    "IoError",
    "clopper_pearson",
    "cp_coverage",
    "exact_se_probability",
    "inp_closed_form",
    "inp_contains",
    "naive_interval_coverage",
    "p_value",
    "run_appendix",
    "safety_certificate_coverage",
    "simulate_appendix",
    "theorem1_bound",
]
