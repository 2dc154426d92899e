"""Kernel convolution with an order-based dependent Dirichlet process.

Thin wrapper over the compiled extension. Long runs (fit, loo, unconditional_corr)
release the GIL.
"""

from ._kcoddp import (
    ParseError,
    cli,
    corr_G_normalized,
    fit,
    loo,
    region_margin,
    sample_sticks,
    simulate,
    smallest_N_for_bound,
    stick_weights,
    tail_moment_T,
    tail_moment_U,
    truncation_bound,
    unconditional_corr,
    w126_annual,
    w126_weight,
)

__version__ = "0.1.0"

__all__ = [
    "ParseError",
    "cli",
    "corr_G_normalized",
    "fit",
    "loo",
    "region_margin",
    "sample_sticks",
    "simulate",
    "smallest_N_for_bound",
    "stick_weights",
    "tail_moment_T",
    "tail_moment_U",
    "truncation_bound",
    "unconditional_corr",
    "w126_annual",
    "w126_weight",
]
