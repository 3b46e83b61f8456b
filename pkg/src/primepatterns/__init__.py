"""Sieve weights, digit sums, bilinear sums, linear forms in primes and Gowers norms."""

from .arith import FactorSieve, PrimeTuple, TruncationParams, build_sieve
from .dickson import INFINITE, Box, LinearFormSystem
from .digits import DigitSpectrum
from .errors import BudgetError, ConsistencyError, DegenerateWeightsError, DomainError
from .gowers import FiniteFunction
from .gpy import GpyConfig

__version__ = "0.1.0"

__all__ = [
    "INFINITE",
    "Box",
    "BudgetError",
    "ConsistencyError",
    "DegenerateWeightsError",
    "DigitSpectrum",
    "DomainError",
    "FactorSieve",
    "FiniteFunction",
    "GpyConfig",
    "LinearFormSystem",
    "PrimeTuple",
    "TruncationParams",
    "build_sieve",
]
