"""Bayes estimators under intrinsic losses and their Bernstein-von Mises behaviour."""

__version__ = "0.1.0"
