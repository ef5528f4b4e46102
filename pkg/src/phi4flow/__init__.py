"""Perturbative flow-equation laboratory for massive phi^4 in four dimensions."""

__version__ = "0.1.0"
