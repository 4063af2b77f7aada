"""Riemann-Cartan geometry of dislocated two-dimensional sheets."""

__version__ = "0.1.0"
