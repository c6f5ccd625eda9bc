"""Phase-modulated and Fourier-basis optimal control for inhomogeneously broadened two-level ensembles."""

__version__ = "0.1.0"
