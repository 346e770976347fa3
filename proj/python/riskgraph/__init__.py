"""Sparse road accident risk forecasting on graphs."""

try:
    from ._core import (
        gauss_loglik,
        nb_loglik,
        run_command,
        zinb_entropy,
        zinb_loglik,
        zinb_mean,
        zinb_p_zero,
        zinb_quantile,
        zinb_variance,
    )
except ImportError:  # in-tree builds put the extension on sys.path directly
    from _core import (
        gauss_loglik,
        nb_loglik,
        run_command,
        zinb_entropy,
        zinb_loglik,
        zinb_mean,
        zinb_p_zero,
        zinb_quantile,
        zinb_variance,
    )

__all__ = [
    "gauss_loglik",
    "nb_loglik",
    "run_command",
    "zinb_entropy",
    "zinb_loglik",
    "zinb_mean",
    "zinb_p_zero",
    "zinb_quantile",
    "zinb_variance",
]
