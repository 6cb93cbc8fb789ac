"""Bifurcation analysis of an SIR model with saturated incidence and treatment."""

__version__ = "0.1.0"
