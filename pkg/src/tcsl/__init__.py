"""Two-color stationary light: spectral and time-domain solvers plus closed-form analytics."""

__version__ = "0.1.0"
