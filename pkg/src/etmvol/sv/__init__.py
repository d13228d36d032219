"""Stochastic-volatility model family: sampling, forecasting, model comparison."""

from .model import McmcSettings, PosteriorDraws, PriorSet, SvSpec  # noqa: F401
from .sampler import sample_posterior  # noqa: F401
