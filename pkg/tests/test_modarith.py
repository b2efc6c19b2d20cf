import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from encsec.errors import DomainError, NotInvertible
from encsec.modarith import (
    Rng,
    gen_prime,
    gen_safe_prime,
    is_probable_prime,
    mod_inv,
    mod_pow,
    normalize_seed,
)

from oracles import brute_inverse, is_prime_trial, naive_pow


@pytest.mark.parametrize("base,exp,mod,expected", [
    (2, 10, 1000, naive_pow(2, 10, 1000)),
    (5, 3, 7, 125 % 7),
])
def test_mod_pow_examples(base, exp, mod, expected):
    assert mod_pow(base, exp, mod) == expected


def test_mod_pow_frozen():
    assert mod_pow(2, 10, 1000) == 24
    assert mod_pow(5, 3, 7) == 6


@given(st.integers(0, 10**6), st.integers(2, 10**6))
def test_mod_pow_zero_exponent(x, m):
    assert mod_pow(x, 0, m) == 1


@given(st.integers(-10**9, 10**9), st.integers(0, 256), st.integers(2, 10**9))
def test_mod_pow_matches_repeated_multiplication(base, exp, mod):
    assert mod_pow(base, exp, mod) == naive_pow(base, exp, mod)


@pytest.mark.parametrize("mod", [0, 1, -5])
def test_mod_pow_rejects_small_modulus(mod):
    with pytest.raises(DomainError):
        mod_pow(3, 2, mod)


def test_mod_inv_examples():
    assert mod_inv(3, 7) == brute_inverse(3, 7) == 5
    for m in (2, 9, 1000):
        assert mod_inv(1, m) == 1
    with pytest.raises(NotInvertible):
        mod_inv(4, 8)


def test_mod_inv_exhaustive_small():
    for m in range(2, 60):
        for a in range(m):
            want = brute_inverse(a, m)
            if want is None:
                with pytest.raises(NotInvertible):
                    mod_inv(a, m)
            else:
                assert mod_inv(a, m) == want


def test_mod_inv_property_64bit():
    rng = Rng(2024)
    checked = 0
    while checked < 10_000:
        m = rng.getrandbits(64) | 1 << 63
        a = rng.randbelow(m)
        try:
            inv = mod_inv(a, m)
        except NotInvertible:
            continue
        assert inv * a % m == 1
        checked += 1


def test_rng_determinism_and_independence():
    a, b = Rng(7), Rng(7)
    assert [a.getrandbits(100) for _ in range(5)] == [b.getrandbits(100) for _ in range(5)]
    assert Rng(7).getrandbits(256) != Rng(8).getrandbits(256)
    parent = Rng(7)
    c1, c2 = parent.child("x"), parent.child("y")
    assert c1.getrandbits(64) != c2.getrandbits(64)
    assert Rng(7).child("x").seed == c1.seed


@given(st.integers(1, 10**12))
@settings(max_examples=200)
def test_randbelow_range(n):
    assert 0 <= Rng(n % 97).randbelow(n) < n


def test_randbelow_roughly_uniform():
    rng = Rng(3)
    counts = [0] * 6
    for _ in range(6000):
        counts[rng.randbelow(6)] += 1
    assert all(850 < c < 1150 for c in counts)


def test_seed_normalisation():
    assert normalize_seed(1) == (1).to_bytes(32, "big")
    assert normalize_seed("00" * 31 + "01") == normalize_seed(1)
    with pytest.raises(DomainError):
        normalize_seed(-1)
    with pytest.raises(DomainError):
        normalize_seed(b"short")


def test_is_probable_prime_against_trial_division():
    for n in range(0, 5000):
        assert is_probable_prime(n) == is_prime_trial(n), n
    # Carmichael numbers and strong pseudoprimes to base 2
    for n in (561, 41041, 825265, 3215031751, 2047, 3277, 4033):
        assert not is_probable_prime(n)


def test_gen_prime_8_bit_seed_1():
    p = gen_prime(8, Rng(1))
    assert 128 <= p <= 255
    assert all(p % d for d in range(2, 256) if is_prime_trial(d) and d < p)
    assert is_prime_trial(p)


@pytest.mark.parametrize("seed", range(10))
def test_gen_prime_16_bit(seed):
    p = gen_prime(16, Rng(seed))
    assert 1 << 15 <= p < 1 << 16
    assert is_prime_trial(p)


@pytest.mark.parametrize("bits", [8, 12, 20, 24, 32])
def test_gen_prime_passes_trial_division(bits):
    for seed in range(5):
        p = gen_prime(bits, Rng(seed))
        assert p.bit_length() == bits and is_prime_trial(p)


def test_gen_prime_deterministic_per_seed():
    assert gen_prime(128, Rng(99)) == gen_prime(128, Rng(99))
    assert gen_prime(128, Rng(99)) != gen_prime(128, Rng(100))


def test_gen_prime_rejects_tiny_sizes():
    with pytest.raises(DomainError):
        gen_prime(7, Rng(0))
    with pytest.raises(DomainError):
        gen_safe_prime(4, Rng(0))


@pytest.mark.parametrize("bits", [8, 10, 16, 24, 32])
def test_gen_safe_prime(bits):
    for seed in range(4):
        p, q = gen_safe_prime(bits, Rng(seed))
        assert p == 2 * q + 1
        assert p.bit_length() == bits and q.bit_length() == bits - 1
        assert is_prime_trial(p) and is_prime_trial(q)


def test_gen_safe_prime_8_bit_class():
    # every 8-bit safe prime, listed by trial division
    safe8 = {p for p in range(128, 256) if is_prime_trial(p) and is_prime_trial((p - 1) // 2)}
    assert safe8 == {167, 179, 227}
    seen = {gen_safe_prime(8, Rng(s))[0] for s in range(40)}
    assert seen <= safe8
    assert gen_safe_prime(8, Rng(5)) == gen_safe_prime(8, Rng(5))


def test_gen_safe_prime_large():
    p, q = gen_safe_prime(256, Rng(11))
    assert p == 2 * q + 1 and p.bit_length() == 256
    assert is_probable_prime(p) and is_probable_prime(q)
