"""Polynomial root finding through eigenspaces of companion-matrix functions."""

from .errors import RootFindingError
from .poly_core import Polynomial, random_polynomial
from .pipelines import (
    RootReport,
    complex_roots_pipeline,
    oracle_real_roots,
    real_roots_pipeline,
    squaring_pipeline,
)
from .bench import RunStats, benchmark

__all__ = [
    "Polynomial",
    "RootFindingError",
    "RootReport",
    "RunStats",
    "benchmark",
    "complex_roots_pipeline",
    "oracle_real_roots",
    "random_polynomial",
    "real_roots_pipeline",
    "squaring_pipeline",
]

__version__ = "0.1.0"
