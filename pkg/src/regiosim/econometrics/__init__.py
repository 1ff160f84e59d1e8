"""Frontier, fixed-effects and random-effects panel estimators."""

from .linear import FeFit, HausmanResult, ReFit, fe_within, hausman, re_gls
from .panel import OlsResult, PanelMatrix, ols
from .sfa import SfaFit, SfaOptions, SfaParams, efficiency_scores, sfa_fit, sfa_loglik

__all__ = [
    "FeFit",
    "HausmanResult",
    "OlsResult",
    "PanelMatrix",
    "ReFit",
    "SfaFit",
    "SfaOptions",
    "SfaParams",
    "efficiency_scores",
    "fe_within",
    "hausman",
    "ols",
    "re_gls",
    "sfa_fit",
    "sfa_loglik",
]
