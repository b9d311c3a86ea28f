"""Riemannian minimum-distance classification with cross-subject transfer (MDWM)."""

__version__ = "0.3.0"
