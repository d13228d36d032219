"""Volatility modelling and forecast evaluation for energy-transition-metal prices."""

__version__ = "0.1.0"
