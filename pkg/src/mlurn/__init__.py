"""Maximal lotteries, the mutation-perturbed urn process that samples them,
and the mean-field dynamics behind it."""

__version__ = "0.1.0"
