"""Time-delay reservoir computing on a nonlinear silicon microring."""

__version__ = "0.1.0"
