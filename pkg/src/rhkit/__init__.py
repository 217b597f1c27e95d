"""Numerical Riemann-Hilbert toolkit: Fredholm determinants, Painleve II,
Tracy-Widom and KPZ distributions, singular integral equations."""

from .errors import *  # noqa: F401,F403

__version__ = "0.1.0"
