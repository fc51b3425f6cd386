"""Bayesian optimization of grid-defined hyperparameter spaces with exact GPs."""

__version__ = "0.1.0"
