"""Information-theoretic measures for multivariate time series."""

__version__ = "0.1.0"
