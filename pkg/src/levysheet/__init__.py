"""Multiparameter Levy white-noise calculus and a Monte-Carlo solver for
the fractional stochastic heat equation."""

__version__ = "0.1.0"
