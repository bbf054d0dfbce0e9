"""Prime tables: segmented odd-only sieve, smallest-prime-factor data, disk cache.

Cache format (little-endian)::

    b"SPFL1" | uint64 bound | packed bits, bit i set iff 2*i + 1 is composite

Bit 0 (the number 1) is stored as set.
"""

from __future__ import annotations

import logging
import math
import os
import struct
from functools import cached_property
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

MAGIC = b"SPFL1"
_HEADER = struct.Struct("<5sQ")
SEGMENT = 1 << 20
MAX_BOUND = 4 * 10**9

DEFAULT_CACHE_DIR = ".spf-cache"


class DomainError(ValueError):
    """Raised when an argument lies outside an operation's domain."""


class ResourceError(RuntimeError):
    """Raised when a request exceeds the documented resource limits."""


def cache_dir(override: str | os.PathLike | None = None) -> Path:
    if override is not None:
        return Path(override)
    return Path(os.environ.get("SPF_CACHE_DIR", DEFAULT_CACHE_DIR))


def _small_primes(n: int) -> np.ndarray:
    """Plain sieve of Eratosthenes for the base primes (n is at most ~6e4)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags).astype(np.int64)


def odd_composite_bitmap(bound: int, segment: int = SEGMENT) -> np.ndarray:
    """Boolean array c with c[i] true iff 2*i + 1 <= bound is not prime.

    Built segment by segment so the working set stays O(segment).
    """
    size = (bound + 1) // 2
    out = np.zeros(size, dtype=bool)
    if size == 0:
        return out
    out[0] = True  # the number 1
    base = _small_primes(math.isqrt(bound))[1:]  # odd base primes
    for lo in range(0, size, segment):
        hi = min(lo + segment, size)
        seg = out[lo:hi]
        # odd n = 2i + 1 in [2lo + 1, 2hi - 1]
        for p in base:
            p = int(p)
            start = p * p
            if start > 2 * hi - 1:
                break
            if start < 2 * lo + 1:
                # first odd multiple of p that is >= 2lo + 1
                m = -(-(2 * lo + 1) // p)
                if m % 2 == 0:
                    m += 1
                start = m * p
            seg[(start - 1) // 2 - lo :: p] = True
    return out


class PrimeTable:
    """Primes up to ``bound`` and their smallest-prime-factor map.

    ``spf`` is materialized lazily as a dense int32/int64 array indexed by n.
    The table is immutable once built and safe to share.
    """

    def __init__(self, bound: int, composite_odd: np.ndarray):
        self.bound = int(bound)
        self._composite_odd = composite_odd
        odd = 2 * np.flatnonzero(~composite_odd).astype(np.int64) + 1
        self.primes = np.concatenate(([2], odd)) if self.bound >= 2 else odd
        self.primes.setflags(write=False)

    def __repr__(self) -> str:
        return f"PrimeTable(bound={self.bound}, count={len(self.primes)})"

    def __len__(self) -> int:
        return len(self.primes)

    @cached_property
    def spf(self) -> np.ndarray:
        n = self.bound
        dtype = np.int32 if n < 2**31 else np.int64
        spf = np.zeros(n + 1, dtype=dtype)
        for p in self.primes[self.primes <= math.isqrt(n)][::-1]:
            p = int(p)
            spf[p * p :: p] = p
        spf[self.primes] = self.primes
        spf.setflags(write=False)
        return spf

    def pi(self, v) -> int:
        """Number of primes <= v (v may be any real <= bound)."""
        v = math.floor(v)
        if v > self.bound:
            raise DomainError(f"pi({v}) needs a table bound >= {v}, have {self.bound}")
        return int(np.searchsorted(self.primes, v, side="right"))

    def primes_below(self, y) -> np.ndarray:
        """Primes p with p < y (strict), y real."""
        lim = math.ceil(y)
        if lim - 1 > self.bound:
            raise DomainError(f"primes below {y} need a table bound >= {lim - 1}")
        return self.primes[: np.searchsorted(self.primes, lim, side="left")]

    def is_prime(self, n: int) -> bool:
        if n > self.bound:
            raise DomainError(f"{n} exceeds table bound {self.bound}")
        if n < 2:
            return False
        if n % 2 == 0:
            return n == 2
        return not self._composite_odd[n // 2]

    def to_bytes(self) -> bytes:
        bits = np.packbits(self._composite_odd, bitorder="little")
        return _HEADER.pack(MAGIC, self.bound) + bits.tobytes()

    @classmethod
    def from_bytes(cls, data: bytes, bound: int | None = None) -> "PrimeTable":
        if len(data) < _HEADER.size:
            raise ValueError("truncated prime cache")
        magic, stored = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise ValueError(f"bad magic {magic!r}")
        size = (stored + 1) // 2
        payload = np.frombuffer(data, dtype=np.uint8, offset=_HEADER.size)
        if len(payload) != (size + 7) // 8:
            raise ValueError("prime cache payload has the wrong length")
        comp = np.unpackbits(payload, count=size, bitorder="little").astype(bool)
        if bound is not None and bound < stored:
            comp = comp[: (bound + 1) // 2]
            stored = bound
        return cls(stored, comp)


def _cache_path(directory: Path) -> Path:
    return directory / "primes.spfl"


def build_prime_table(
    bound: int,
    cache: bool | str | os.PathLike = False,
) -> PrimeTable:
    """Build (or load from cache) the prime table up to ``bound`` inclusive.

    ``cache`` may be False (no disk access), True (use ``SPF_CACHE_DIR`` or
    ``./.spf-cache``), or an explicit directory.  A cached table with a
    larger bound is sliced; a smaller or corrupt one is rebuilt.
    """
    bound = int(bound)
    if bound < 2:
        raise DomainError("prime table bound must be >= 2")
    if bound > MAX_BOUND:
        raise ResourceError(f"prime table bound {bound} exceeds limit {MAX_BOUND}")
    if cache is False:
        return _memory_table(bound)

    directory = cache_dir(None if cache is True else cache)
    path = _cache_path(directory)
    if path.exists():
        try:
            with open(path, "rb") as fh:
                head = fh.read(_HEADER.size)
                magic, stored = _HEADER.unpack(head)
                if magic == MAGIC and stored >= bound:
                    return PrimeTable.from_bytes(head + fh.read(), bound=bound)
        except (ValueError, struct.error, OSError) as exc:
            log.warning("prime cache %s unreadable (%s); rebuilding", path, exc)
    table = PrimeTable(bound, odd_composite_bitmap(bound))
    try:
        directory.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes(table.to_bytes())
        tmp.replace(path)
    except OSError as exc:
        log.warning("could not write prime cache %s: %s", path, exc)
    return table


_TABLES: dict[int, PrimeTable] = {}


def _memory_table(bound: int) -> PrimeTable:
    if bound in _TABLES:
        return _TABLES[bound]
    larger = [b for b in _TABLES if b > bound]
    if larger:
        comp = _TABLES[min(larger)]._composite_odd[: (bound + 1) // 2]
        table = PrimeTable(bound, comp)
    else:
        table = PrimeTable(bound, odd_composite_bitmap(bound))
    _TABLES[bound] = table
    return table


def primes_up_to(n) -> np.ndarray:
    """Primes <= n as int64, served from the largest in-memory table."""
    n = math.floor(n)
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    big = max(_TABLES, default=0)
    if big < n:
        _TABLES[n] = PrimeTable(n, odd_composite_bitmap(n))
        big = n
    primes = _TABLES[big].primes
    return primes[: np.searchsorted(primes, n, side="right")]
