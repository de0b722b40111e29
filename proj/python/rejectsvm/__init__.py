"""Sparse l1-penalized classification with a reject option."""

from ._core import (
    CostParams,
    Dictionary,
    Model,
    bayes_rule,
    bounds,
    cross_validate,
    fit,
    gen_hinge,
    log_grid,
    rate_r,
    reject_loss,
    risk_report,
    theoretical_r,
)

__all__ = [
    "CostParams",
    "Dictionary",
    "Model",
    "bayes_rule",
    "bounds",
    "cross_validate",
    "fit",
    "gen_hinge",
    "log_grid",
    "rate_r",
    "reject_loss",
    "risk_report",
    "theoretical_r",
]
