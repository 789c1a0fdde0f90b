"""Bayesian network structure learning with NSGA-II and regularized hill climbing."""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
