"""Modular arithmetic, primality testing and seeded randomness.

Integers are plain Python ``int`` objects throughout. Exponentiation is
delegated to gmpy2 when it is importable since the games perform tens of
thousands of encryptions; results are always converted back to ``int``.
"""
from __future__ import annotations

import hashlib
import math

from .errors import DomainError, NotInvertible

try:
    import gmpy2
except ImportError:  # pragma: no cover
    gmpy2 = None

MR_ROUNDS = 40

SMALL_PRIMES = [p for p in range(3, 2000, 2) if all(p % d for d in range(3, math.isqrt(p) + 1, 2))]
_PRIMORIAL = math.prod(SMALL_PRIMES)


class Rng:
    """Deterministic pseudorandom stream: SHA-256 in counter mode over a 256-bit seed.

    Two handles built from the same seed yield the same stream. Handles are
    single-owner; derive a :meth:`child` for every independent consumer
    instead of sharing one.
    """

    __slots__ = ("seed", "_counter", "_pool")

    def __init__(self, seed: int | bytes | str):
        self.seed = normalize_seed(seed)
        self._counter = 0
        self._pool = b""

    def __repr__(self):
        return f"Rng({self.seed.hex()!r})"

    def _take(self, nbytes: int) -> bytes:
        chunks = [self._pool]
        have = len(self._pool)
        while have < nbytes:
            block = hashlib.sha256(self.seed + self._counter.to_bytes(8, "big")).digest()
            self._counter += 1
            chunks.append(block)
            have += len(block)
        pool = b"".join(chunks)
        self._pool = pool[nbytes:]
        return pool[:nbytes]

    def getrandbits(self, k: int) -> int:
        if k <= 0:
            return 0
        nbytes = (k + 7) // 8
        return int.from_bytes(self._take(nbytes), "big") >> (8 * nbytes - k)

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection sampling."""
        if n <= 0:
            raise DomainError("randbelow needs n >= 1")
        k = n.bit_length()
        while True:
            r = self.getrandbits(k)
            if r < n:
                return r

    def randint(self, a: int, b: int) -> int:
        """Uniform integer in [a, b], both ends inclusive."""
        if b < a:
            raise DomainError(f"empty range [{a}, {b}]")
        return a + self.randbelow(b - a + 1)

    def bit(self) -> int:
        return self.getrandbits(1)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return self.getrandbits(53) / (1 << 53)

    def uniform(self, a: float, b: float) -> float:
        return a + (b - a) * self.random()

    def child(self, *labels) -> "Rng":
        """Independent handle keyed by this seed and ``labels``."""
        tag = "/".join(str(x) for x in labels).encode()
        return Rng(hashlib.sha256(b"encsec-child\x00" + self.seed + tag).digest())


def normalize_seed(seed: int | bytes | str) -> bytes:
    """Map an int, 32-byte string or 64-char hex string onto a 32-byte seed."""
    if isinstance(seed, Rng):
        return seed.seed
    if isinstance(seed, bool):
        raise DomainError("seed must be an int, bytes or hex string")
    if isinstance(seed, int):
        if not 0 <= seed < 1 << 256:
            raise DomainError("integer seed must lie in [0, 2**256)")
        return seed.to_bytes(32, "big")
    if isinstance(seed, str):
        try:
            seed = bytes.fromhex(seed)
        except ValueError as exc:
            raise DomainError(f"seed string is not hex: {seed!r}") from exc
    if isinstance(seed, (bytes, bytearray)):
        if len(seed) != 32:
            raise DomainError("byte seed must be exactly 32 bytes")
        return bytes(seed)
    raise DomainError(f"unsupported seed type {type(seed).__name__}")


def mod_pow(base: int, exp: int, modulus: int) -> int:
    if modulus < 2:
        raise DomainError(f"modulus must be >= 2, got {modulus}")
    if exp < 0:
        raise DomainError("negative exponent; invert with mod_inv first")
    if gmpy2 is not None:
        return int(gmpy2.powmod(base, exp, modulus))
    return pow(base, exp, modulus)


def mod_inv(a: int, modulus: int) -> int:
    """Inverse of ``a`` modulo ``modulus`` by the extended Euclidean algorithm."""
    if modulus < 2:
        raise DomainError(f"modulus must be >= 2, got {modulus}")
    r0, r1 = modulus, a % modulus
    s0, s1 = 0, 1
    while r1:
        quot = r0 // r1
        r0, r1 = r1, r0 - quot * r1
        s0, s1 = s1, s0 - quot * s1
    if r0 != 1:
        raise NotInvertible(f"{a} has no inverse mod {modulus} (gcd={r0})")
    return s0 % modulus


def _miller_rabin_round(n: int, d: int, s: int, a: int) -> bool:
    x = mod_pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def miller_rabin(n: int, rng: Rng, rounds: int = MR_ROUNDS) -> bool:
    """``rounds`` Miller-Rabin rounds with random witnesses; n odd and > 3."""
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for _ in range(rounds):
        if not _miller_rabin_round(n, d, s, rng.randint(2, n - 2)):
            return False
    return True


def is_probable_prime(n: int, rng: Rng | None = None, rounds: int = MR_ROUNDS) -> bool:
    """Trial division by small primes, then ``rounds`` Miller-Rabin rounds.

    Witnesses are drawn from ``rng``; without one a handle is derived from
    ``n`` itself so the answer is reproducible.
    """
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for p in SMALL_PRIMES:
        if n % p == 0:
            return n == p
    if n < SMALL_PRIMES[-1] ** 2:
        return True
    if rng is None:
        rng = Rng(hashlib.sha256(b"mr" + n.to_bytes((n.bit_length() + 7) // 8, "big")).digest())
    return miller_rabin(n, rng, rounds)


def _sieved(n: int) -> bool:
    # true when n survives division by every small prime (n itself large)
    return math.gcd(n, _PRIMORIAL) == 1


def gen_prime(bits: int, rng: Rng) -> int:
    """Random prime with exactly ``bits`` bits."""
    if bits < 8:
        raise DomainError(f"gen_prime needs bits >= 8, got {bits}")
    top = 1 << (bits - 1)
    while True:
        cand = rng.getrandbits(bits) | top | 1
        if cand.bit_length() <= 22:
            if is_probable_prime(cand, rng):
                return cand
        elif _sieved(cand) and miller_rabin(cand, rng):
            return cand


def gen_safe_prime(bits: int, rng: Rng) -> tuple[int, int]:
    """Random safe prime ``p = 2q + 1`` of ``bits`` bits; returns ``(p, q)``."""
    if bits < 8:
        raise DomainError(f"gen_safe_prime needs bits >= 8, got {bits}")
    top = 1 << (bits - 2)
    while True:
        q = rng.getrandbits(bits - 1) | top | 1
        p = 2 * q + 1
        if q.bit_length() > 22 and not _sieved(q * p):
            continue
        # cheap base-2 screens before the full test
        if q > 3 and mod_pow(2, q - 1, q) != 1:
            continue
        if mod_pow(2, p - 1, p) != 1:
            continue
        if is_probable_prime(q, rng) and is_probable_prime(p, rng):
            return p, q
