"""Exact counts of small prime factors.

Everything here is exact integer arithmetic over a segmented sieve:
omega_y(n), the histogram N_k(x, y), Legendre's Phi(x, y), the generating
polynomial S_z(x, y) = sum_k N_k z^k, squarefree counts and prime sums.

The convention throughout is strict: only primes p < y count.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Integral, Rational

import numpy as np

from .primes import DomainError, PrimeTable, ResourceError, SEGMENT, build_prime_table, primes_up_to

MAX_X = 10**10


def _threshold(y) -> int:
    """Integer Y with {p < y} == {p < Y} for real y."""
    return math.ceil(y)


@dataclass(frozen=True)
class CountVector:
    """Exact histogram N_k(x, y) for k = 0..k_max."""

    x: int
    y: float
    counts: tuple[int, ...]

    @property
    def k_max(self) -> int:
        return len(self.counts) - 1

    def __getitem__(self, k: int) -> int:
        return self.counts[k] if 0 <= k < len(self.counts) else 0

    def total(self) -> int:
        return sum(self.counts)

    def evaluate(self, z):
        """sum_k N_k z^k by Horner from the top coefficient.

        Integer or Fraction z is evaluated exactly; 0**0 is taken as 1.
        """
        if isinstance(z, (Integral, Rational)):
            acc = 0
            for c in reversed(self.counts):
                acc = acc * z + c
            return acc
        z = complex(z)
        acc = 0j
        for c in reversed(self.counts):
            acc = acc * z + c
        return acc

    def evaluate_many(self, zs: np.ndarray) -> np.ndarray:
        zs = np.asarray(zs, dtype=complex)
        acc = np.zeros_like(zs)
        for c in reversed(self.counts):
            acc = acc * zs + float(c)
        return acc


def _check_x(x) -> int:
    x = math.floor(x)
    if x > MAX_X:
        raise ResourceError(f"x = {x} exceeds the sieve limit {MAX_X}")
    return x


def omega_segments(x: int, y, segment: int = SEGMENT, squarefree: bool = False):
    """Yield (lo, omega) with omega[i] = omega_y(lo + i) for lo + i in [lo, hi).

    Primes p <= sqrt(x) are sieved directly.  When y exceeds sqrt(x) the
    product of the small prime powers dividing n is accumulated as well;
    the cofactor n / prod is then 1 or a single prime q > sqrt(x), which
    counts iff q < y.  With ``squarefree`` a third array flags squarefree n.
    """
    x = int(x)
    Y = _threshold(y)
    root = math.isqrt(x)
    small = primes_up_to(min(root, Y - 1))
    need_cofactor = Y - 1 > root
    for lo in range(1, x + 1, segment):
        hi = min(lo + segment, x + 1)
        n = hi - lo
        omega = np.zeros(n, dtype=np.int8)
        prod = np.ones(n, dtype=np.int64) if need_cofactor else None
        sqfree = np.ones(n, dtype=bool) if squarefree else None
        for p in small:
            p = int(p)
            first = (-lo) % p
            if first >= n:
                continue
            omega[first::p] += 1
            if need_cofactor:
                q = p
                while q < hi:
                    prod[(-lo) % q :: q] *= p
                    q *= p
            if squarefree and p * p < hi:
                sqfree[(-lo) % (p * p) :: p * p] = False
        if need_cofactor:
            cof = np.arange(lo, hi, dtype=np.int64) // prod
            omega += ((cof > 1) & (cof < Y)).astype(np.int8)
        if squarefree:
            yield lo, omega, sqfree
        else:
            yield lo, omega


@lru_cache(maxsize=64)
def _count_nk_cached(x: int, Y: int) -> tuple[int, ...]:
    hist = np.zeros(64, dtype=np.int64)
    for _, omega in omega_segments(x, Y):
        b = np.bincount(omega, minlength=64)
        hist[: len(b)] += b
    k_max = int(np.flatnonzero(hist).max()) if hist.any() else 0
    return tuple(int(v) for v in hist[: k_max + 1])


def count_nk(x, y) -> CountVector:
    """Exact N_k(x, y) = #{n <= x : omega_y(n) = k} for all k."""
    if x < 1:
        raise DomainError("x must be >= 1")
    if y < 2:
        raise DomainError("y must be >= 2")
    xi = _check_x(x)
    return CountVector(xi, y, _count_nk_cached(xi, _threshold(y)))


def omega_y(n: int, y, table: PrimeTable | None = None) -> int:
    """Number of distinct primes p < y dividing n."""
    n = int(n)
    if n < 1:
        raise DomainError("n must be >= 1")
    if y < 2:
        raise DomainError("y must be >= 2")
    Y = _threshold(y)
    if table is None:
        table = build_prime_table(max(2, min(Y - 1, math.isqrt(n)) + 1))
    if n <= table.bound:
        spf = table.spf
        count = 0
        while n > 1:
            p = int(spf[n])
            if p >= Y:
                break
            count += 1
            while n % p == 0:
                n //= p
        return count
    count = 0
    for p in table.primes:
        p = int(p)
        if p >= Y:
            return count
        if p * p > n:
            return count + (1 < n < Y)
        if n % p == 0:
            count += 1
            while n % p == 0:
                n //= p
    if n == 1:
        return count
    if (table.bound + 1) ** 2 > n:
        # no factor <= bound, so n is prime
        return count + (n < Y)
    raise DomainError(f"prime table bound {table.bound} too small to factor n")


_WHEEL_A = 7


@lru_cache(maxsize=1)
def _wheel() -> tuple[int, list[np.ndarray]]:
    """Cumulative survivor counts modulo the primorial of the first 7 primes."""
    ps = [2, 3, 5, 7, 11, 13, 17]
    M = math.prod(ps)
    alive = np.ones(M, dtype=bool)
    alive[0] = False  # residue 0 stands for M itself, which is divisible
    tables = [None]
    for p in ps:
        alive[::p] = False
        cum = np.cumsum(alive, dtype=np.int32)
        tables.append(cum)
    return M, tables


def _phi_small(v: int, a: int) -> int:
    M, tables = _wheel()
    cum = tables[a]
    return (v // M) * int(cum[-1]) + int(cum[v % M])


def phi(x, y, table: PrimeTable | None = None) -> int:
    """Legendre's Phi(x, y): #{n <= x : no prime factor p < y}.

    Uses Phi(x, a) = Phi(x, a-1) - Phi(x // p_a, a-1) over the primes
    below y, memoized, with the shortcut Phi(x, a) = 1 + pi(x) - a once
    p_{a+1}^2 > x.  Independent of the histogram sieve.
    """
    x = math.floor(x)
    if x < 1:
        return 0
    if y < 2:
        raise DomainError("y must be >= 2")
    if table is None or table.bound < x:
        table = build_prime_table(max(x, 2))
    ps = [int(p) for p in table.primes_below(min(y, x + 1))]  # primes above x divide nothing
    primes = table.primes
    memo: dict[tuple[int, int], int] = {}

    def rec(v: int, a: int) -> int:
        if a == 0 or v == 0:
            return v
        if a <= _WHEEL_A:
            return _phi_small(v, a)
        if ps[a - 1] >= v:
            return 1
        # every composite <= v has a prime factor <= sqrt(v)
        nxt = int(primes[a]) if a < len(primes) else v + 1
        if nxt * nxt > v:
            return 1 + int(np.searchsorted(primes, v, side="right")) - a
        key = (v, a)
        hit = memo.get(key)
        if hit is not None:
            return hit
        out = rec(v, a - 1) - rec(v // ps[a - 1], a - 1)
        memo[key] = out
        return out

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, len(ps) + 1000))
    try:
        return rec(x, len(ps))
    finally:
        sys.setrecursionlimit(limit)


def sum_sz(x, y, z):
    """S_z(x, y) = sum_{n <= x} z^omega_y(n), evaluated from the exact histogram."""
    return count_nk(x, y).evaluate(z)


def count_nk_squarefree(x, k: int) -> int:
    """Number of squarefree n <= x with exactly k prime factors."""
    if k < 0:
        raise DomainError("k must be >= 0")
    x = _check_x(x)
    if x < 1:
        return 0
    total = 0
    for _, omega, sqfree in omega_segments(x, x + 1, squarefree=True):
        total += int(np.count_nonzero((omega == k) & sqfree))
    return total


FEASIBLE_LOG_SUM_X = 10**7


def prime_power_log_sum(x, k: int, l: int) -> float:
    """Sum of log(P)^l / P over P = p_1^e_1 ... p_k^e_k < x with distinct primes.

    Such P are exactly the integers n < x with omega(n) = k, so the sum runs
    over the sieve instead of an explicit tuple enumeration.
    """
    if k < 1 or l < 0:
        raise DomainError("need k >= 1 and l >= 0")
    x = math.ceil(x) - 1  # n < x
    if x > FEASIBLE_LOG_SUM_X:
        raise ResourceError(
            f"prime_power_log_sum is limited to x <= {FEASIBLE_LOG_SUM_X}; "
            "use a smaller x or the asymptotic form"
        )
    if x < 2:
        return 0.0
    parts = []
    for lo, omega in omega_segments(x, x + 1):
        n = np.arange(lo, lo + len(omega), dtype=np.float64)[omega == k]
        parts.append(np.log(n) ** l / n)
    return math.fsum(np.concatenate(parts)) if parts else 0.0


def omega_k_stats(limit, k: int) -> tuple[int, float]:
    """(count, sum of 1/n) over n <= limit with omega(n) == k.

    For k >= 1 these n are the products of k prime powers with distinct primes.
    """
    limit = math.floor(limit)
    if limit > FEASIBLE_LOG_SUM_X:
        raise ResourceError(f"enumeration limited to {FEASIBLE_LOG_SUM_X}")
    if k < 0:
        raise DomainError("k must be >= 0")
    if limit < 1:
        return 0, 0.0
    count = 0
    parts = []
    for lo, omega in omega_segments(limit, limit + 1):
        n = np.arange(lo, lo + len(omega), dtype=np.float64)[omega == k]
        count += len(n)
        parts.append(1.0 / n)
    return count, math.fsum(np.concatenate(parts))


def mertens_sum(y) -> float:
    """sum_{p < y} 1/p."""
    if y < 3:
        raise DomainError("y must be >= 3")
    ps = primes_up_to(_threshold(y) - 1)
    return math.fsum(1.0 / ps)


def _exact_z(z):
    if isinstance(z, (Integral, Fraction)):
        return z
    if isinstance(z, float) and z.is_integer():
        return int(z)
    return None


def buchstab_identity_residual(x, y, h, z, *, exact: bool | None = None) -> float:
    """|S_z(x,y) - S_z(x,y^h) - (1-z) sum_{y <= p < y^h} S_z(x/p, p)|.

    Both sides come from exact histograms.  For integer (or Fraction) z the
    sums are formed in exact arithmetic, so the residual is exactly 0.
    """
    x = math.floor(x)
    if not (x >= y >= 2) or h < 1:
        raise DomainError("need x >= y >= 2 and h >= 1")
    upper = y**h
    if upper > x * (1 + 1e-12):
        raise DomainError("need y^h <= x")
    zz = _exact_z(z) if exact is not False else None
    if zz is None:
        zz = complex(z)
    Y = _threshold(y)
    U = _threshold(upper)
    lhs = count_nk(x, Y).evaluate(zz)
    first = count_nk(x, U).evaluate(zz)

    ps = primes_up_to(U - 1)
    ps = ps[ps >= Y]
    acc = 0 if not isinstance(zz, complex) else 0j
    if len(ps):
        top = x // Y
        # om[n] = omega_p(n) for n <= top, advanced prime by prime
        om = np.zeros(top + 1, dtype=np.int64)
        for p in primes_up_to(Y - 1):
            om[int(p) :: int(p)] += 1
        prev = None
        for p in ps:
            p = int(p)
            if prev is not None:
                om[prev::prev] += 1
            m = x // p
            hist = np.bincount(om[1 : m + 1])
            cv = CountVector(m, p, tuple(int(c) for c in hist))
            acc += cv.evaluate(zz)
            prev = p
    rhs = first + (1 - zz) * acc
    return float(abs(lhs - rhs))
