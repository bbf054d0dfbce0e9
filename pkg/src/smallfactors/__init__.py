"""Exact and asymptotic counts of integers by their number of small prime factors."""

from .primes import DomainError, PrimeTable, ResourceError, build_prime_table
from .sieve import CountVector, count_nk, omega_y, phi, sum_sz

__all__ = [
    "CountVector",
    "DomainError",
    "PrimeTable",
    "ResourceError",
    "build_prime_table",
    "count_nk",
    "omega_y",
    "phi",
    "sum_sz",
]
