"""Renormalization cocycles, twisted ergodic integrals and weak-mixing diagnostics
for globally random substitution tilings of R and R^2."""

__version__ = "0.1.0"
