"""Coefficient extraction on a circle: N_k from values of S_z.

N_k = (1 / (m r^k)) sum_{j < m} S(r w^j) w^(-jk),  w = e^(2 pi i / m),

i.e. a discrete Fourier transform of the sums at m equally spaced points.
For a polynomial of degree < m this is exact up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .primes import DomainError
from .sieve import count_nk

RADIUS_MIN, RADIUS_MAX = 0.05, 10.0
ZERO_RADIUS = 0.5
NOISE = 1e-12  # relative size below which an extracted coefficient counts as zero


class ContourSpecError(DomainError):
    """Inconsistent contour parameters (too few points for the degree)."""


@dataclass(frozen=True)
class ContourSpec:
    radius: float
    points: int
    k_max: int

    def __post_init__(self):
        if not self.radius > 0:
            raise ContourSpecError("radius must be > 0")
        if self.points < 1 or self.points & (self.points - 1):
            raise ContourSpecError("points must be a power of two")
        if self.k_max < 0:
            raise ContourSpecError("k_max must be >= 0")
        if self.points <= self.k_max:
            raise ContourSpecError(f"points = {self.points} must exceed k_max = {self.k_max}")


@dataclass(frozen=True)
class Extraction:
    counts: np.ndarray
    radius: float
    max_abs_sum: float

    def conditioning(self) -> np.ndarray:
        """max_j |S(z_j)| / (r^k N_k); inf where the coefficient is at rounding level."""
        k = np.arange(len(self.counts))
        scale = float(self.radius) ** k * np.abs(self.counts)
        with np.errstate(divide="ignore"):
            return np.where(scale > NOISE * self.max_abs_sum, self.max_abs_sum / scale, np.inf)


def radius_policy(k: int, y) -> float:
    """k / loglog y clamped to [0.05, 10]; 0.5 for k = 0."""
    if k < 0:
        raise DomainError("k must be >= 0")
    if y < 16:
        raise DomainError("y must be >= 16")
    if k == 0:
        return ZERO_RADIUS
    return min(max(k / math.log(math.log(y)), RADIUS_MIN), RADIUS_MAX)


def circle_coefficients(f: Callable[[np.ndarray], np.ndarray], radius: float, points: int) -> np.ndarray:
    """Taylor coefficients 0..points-1 of f from its values on |z| = radius."""
    z = radius * np.exp(2j * np.pi * np.arange(points) / points)
    values = np.asarray(f(z), dtype=complex)
    return np.fft.fft(values) / points / float(radius) ** np.arange(points)


def extract(x, y, spec: ContourSpec, evaluator: Callable | None = None) -> Extraction:
    """Extraction with its conditioning data.

    ``evaluator`` maps an array of complex z to S_z(x, y); the default is the
    exact sum from the sieve histogram.
    """
    if x < 2:
        counts = np.zeros(spec.k_max + 1)
        if x >= 1:
            counts[0] = 1.0
        return Extraction(counts, spec.radius, float(x >= 1))
    if evaluator is None:
        cv = count_nk(x, y)
        if cv.k_max >= spec.points:
            raise ContourSpecError(f"points = {spec.points} must exceed the degree {cv.k_max}")
        evaluator = cv.evaluate_many
    z = spec.radius * np.exp(2j * np.pi * np.arange(spec.points) / spec.points)
    values = np.asarray(evaluator(z), dtype=complex)
    k = np.arange(spec.k_max + 1)
    coef = np.fft.fft(values)[: spec.k_max + 1] / spec.points / float(spec.radius) ** k
    return Extraction(coef.real.copy(), spec.radius, float(np.max(np.abs(values))))


def extract_counts(x, y, spec: ContourSpec, evaluator: Callable | None = None) -> list[float]:
    """N_0..N_{k_max} recovered from S_z on the circle |z| = spec.radius."""
    return extract(x, y, spec, evaluator).counts.tolist()


def scalar_evaluator(fn: Callable[[complex], complex]) -> Callable[[np.ndarray], np.ndarray]:
    """Lift a scalar z -> S(z) function to arrays of nodes."""
    return lambda zs: np.array([complex(fn(complex(z))) for z in zs])
