"""Vanishing of central values of elliptic-curve L-functions twisted by
Dirichlet characters of odd prime order."""

__version__ = "0.1.0"
