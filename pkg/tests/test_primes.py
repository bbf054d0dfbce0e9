import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import small_primes
from smallfactors.primes import (
    DomainError,
    PrimeTable,
    ResourceError,
    build_prime_table,
    odd_composite_bitmap,
    primes_up_to,
)


def test_small_table_matches_trial_division():
    table = build_prime_table(5000)
    assert table.primes.tolist() == small_primes(5000)


def test_prime_counts_at_powers_of_ten():
    # pi(10^k), standard values
    table = build_prime_table(10**7)
    assert [table.pi(10**k) for k in range(1, 8)] == [4, 25, 168, 1229, 9592, 78498, 664579]


def test_segment_size_does_not_matter():
    a = odd_composite_bitmap(200_003, segment=1 << 20)
    b = odd_composite_bitmap(200_003, segment=977)
    assert np.array_equal(a, b)


def test_spf_is_smallest_prime_factor():
    table = build_prime_table(3000)
    spf = table.spf
    for n in range(2, 3001):
        p = int(spf[n])
        assert n % p == 0
        assert all(n % d for d in range(2, p))


def test_primes_below_is_strict():
    table = build_prime_table(100)
    assert table.primes_below(11).tolist() == [2, 3, 5, 7]
    assert table.primes_below(11.5).tolist() == [2, 3, 5, 7, 11]
    assert table.primes_below(2).tolist() == []


def test_is_prime():
    table = build_prime_table(100)
    assert [n for n in range(101) if table.is_prime(n)] == small_primes(100)
    with pytest.raises(DomainError):
        table.is_prime(101)


def test_bounds_are_enforced():
    with pytest.raises(DomainError):
        build_prime_table(1)
    with pytest.raises(ResourceError):
        build_prime_table(10**10)


def test_serialization_round_trip():
    table = build_prime_table(12345)
    back = PrimeTable.from_bytes(table.to_bytes())
    assert back.bound == 12345
    assert np.array_equal(back.primes, table.primes)
    sliced = PrimeTable.from_bytes(table.to_bytes(), bound=1000)
    assert sliced.primes.tolist() == small_primes(1000)


def test_disk_cache_reuse_and_corruption(tmp_path, caplog):
    t1 = build_prime_table(50_000, cache=tmp_path)
    path = tmp_path / "primes.spfl"
    assert path.exists()
    t2 = build_prime_table(20_000, cache=tmp_path)
    assert t2.primes.tolist() == t1.primes[t1.primes <= 20_000].tolist()
    path.write_bytes(b"garbage")
    t3 = build_prime_table(20_000, cache=tmp_path)
    assert np.array_equal(t3.primes, t2.primes)
    assert "rebuilding" in caplog.text


def test_cache_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("SPF_CACHE_DIR", str(tmp_path / "env"))
    build_prime_table(1000, cache=True)
    assert (tmp_path / "env" / "primes.spfl").exists()


SMALL = small_primes(20_000)


@given(st.integers(min_value=2, max_value=20_000))
def test_primes_up_to_prefix(n):
    ps = primes_up_to(n)
    assert ps[-1] <= n
    assert ps.tolist() == [p for p in SMALL if p <= n]
