"""Homomorphic cryptosystems: Paillier-style, ElGamal-style and deterministic breaks.

Every scheme is a tuple of algorithms (keygen, encrypt, decrypt) plus one
homomorphic ciphertext operation and its inverse. Public and secret keys
carry their ``scheme_id`` so the module-level functions dispatch on the key.

``broken`` is ElGamal with the encryption randomness pinned to 1 and
``broken-additive`` is Paillier with the randomness pinned to 1. Both are
correct and homomorphic but deterministic, hence trivially distinguishable.
"""
from __future__ import annotations

import enum
import functools
import hashlib
import json
import math
from dataclasses import dataclass

from .errors import DecodeError, DomainError
from .modarith import Rng, gen_prime, gen_safe_prime, mod_inv, mod_pow

ENVELOPE_VERSION = 1
MIN_LAMBDA = 16
EXPERIMENT_LAMBDAS = (64, 128, 256, 512, 1024, 2048)


class SchemeId(str, enum.Enum):
    ADDITIVE = "additive"
    MULTIPLICATIVE = "multiplicative"
    BROKEN = "broken"
    BROKEN_ADDITIVE = "broken-additive"

    @property
    def is_additive(self) -> bool:
        return self in (SchemeId.ADDITIVE, SchemeId.BROKEN_ADDITIVE)

    @property
    def is_deterministic(self) -> bool:
        return self in (SchemeId.BROKEN, SchemeId.BROKEN_ADDITIVE)


def scheme_id(value) -> SchemeId:
    try:
        return SchemeId(value)
    except ValueError:
        choices = ", ".join(s.value for s in SchemeId)
        raise DomainError(f"unknown scheme {value!r}; choose from {choices}") from None


@dataclass(frozen=True)
class PaillierPublicKey:
    scheme_id: SchemeId
    n: int

    @property
    def n2(self) -> int:
        return self.n * self.n

    @property
    def plaintext_modulus(self) -> int:
        return self.n

    def parts(self) -> tuple[int, ...]:
        return (self.n,)


@dataclass(frozen=True)
class PaillierSecretKey:
    scheme_id: SchemeId
    n: int
    lam: int
    mu: int

    def parts(self) -> tuple[int, ...]:
        return (self.n, self.lam, self.mu)


@dataclass(frozen=True)
class GroupPublicKey:
    """ElGamal key over the order-q subgroup of Z_p^*, p = 2q + 1."""

    scheme_id: SchemeId
    p: int
    q: int
    g: int
    h: int

    @property
    def plaintext_modulus(self) -> int:
        return self.p

    def parts(self) -> tuple[int, ...]:
        return (self.p, self.q, self.g, self.h)


@dataclass(frozen=True)
class GroupSecretKey:
    scheme_id: SchemeId
    p: int
    q: int
    x: int

    def parts(self) -> tuple[int, ...]:
        return (self.p, self.q, self.x)


@dataclass(frozen=True)
class KeyPair:
    scheme_id: SchemeId
    lam: int
    pk: PaillierPublicKey | GroupPublicKey
    sk: PaillierSecretKey | GroupSecretKey


@dataclass(frozen=True)
class Ciphertext:
    scheme_id: SchemeId
    parts: tuple[int, ...]

    def hex(self) -> list[str]:
        return [format(x, "x") for x in self.parts]


# -- key generation ---------------------------------------------------------


def check_lambda(sid: SchemeId, lam: int) -> None:
    if not isinstance(lam, int) or lam < MIN_LAMBDA:
        raise DomainError(f"security parameter must be an integer >= {MIN_LAMBDA}, got {lam!r}")
    if sid.is_additive and lam % 2:
        raise DomainError(f"additive schemes need an even security parameter, got {lam}")


def paillier_keypair_from_primes(p: int, q: int, sid=SchemeId.ADDITIVE) -> KeyPair:
    """Paillier key with g = n + 1 built from explicit primes."""
    sid = scheme_id(sid)
    n = p * q
    if math.gcd(n, (p - 1) * (q - 1)) != 1:
        raise DomainError(f"gcd(pq, (p-1)(q-1)) != 1 for p={p}, q={q}")
    lam = math.lcm(p - 1, q - 1)
    # (n+1)^lam = 1 + lam*n (mod n^2), so L(g^lam) = lam
    mu = mod_inv(lam, n)
    return KeyPair(sid, n.bit_length(), PaillierPublicKey(sid, n), PaillierSecretKey(sid, n, lam, mu))


def _paillier_keygen(sid: SchemeId, lam: int, rng: Rng) -> KeyPair:
    half = lam // 2
    while True:
        p = gen_prime(half, rng)
        q = gen_prime(half, rng)
        if p != q and (p * q).bit_length() == lam:
            return paillier_keypair_from_primes(p, q, sid)


@functools.lru_cache(maxsize=None)
def group_parameters(lam: int) -> tuple[int, int, int]:
    """Public ``(p, q, g)`` for a ``lam``-bit safe-prime group.

    Derived deterministically from ``lam`` so every key of one size shares
    the group; only the secret exponent is drawn per key.
    """
    rng = Rng(hashlib.sha256(b"encsec-group\x00" + str(lam).encode()).digest())
    p, q = gen_safe_prime(lam, rng)
    while True:
        g = mod_pow(rng.randint(2, p - 2), 2, p)
        if g != 1:
            return p, q, g


def group_keypair(p: int, q: int, g: int, x: int, sid=SchemeId.MULTIPLICATIVE) -> KeyPair:
    sid = scheme_id(sid)
    if p != 2 * q + 1 or not 1 <= x < q or mod_pow(g, q, p) != 1 or g == 1:
        raise DomainError("invalid group parameters or secret exponent")
    h = mod_pow(g, x, p)
    return KeyPair(sid, p.bit_length(), GroupPublicKey(sid, p, q, g, h), GroupSecretKey(sid, p, q, x))


def _group_keygen(sid: SchemeId, lam: int, rng: Rng) -> KeyPair:
    p, q, g = group_parameters(lam)
    return group_keypair(p, q, g, rng.randint(1, q - 1), sid)


def keygen(sid, lam: int, rng: Rng) -> KeyPair:
    sid = scheme_id(sid)
    check_lambda(sid, lam)
    if sid.is_additive:
        return _paillier_keygen(sid, lam, rng)
    return _group_keygen(sid, lam, rng)


# -- plaintext space --------------------------------------------------------


def in_subgroup(pk: GroupPublicKey, m: int) -> bool:
    return 1 <= m < pk.p and mod_pow(m, pk.q, pk.p) == 1


def is_valid_plaintext(pk, m) -> bool:
    if not isinstance(m, int) or isinstance(m, bool):
        return False
    if isinstance(pk, PaillierPublicKey):
        return 0 <= m < pk.n
    return in_subgroup(pk, m)


def check_plaintext(pk, m) -> None:
    if not is_valid_plaintext(pk, m):
        if isinstance(pk, PaillierPublicKey):
            raise DomainError(f"plaintext {m!r} outside [0, n)")
        raise DomainError(f"plaintext {m!r} is not an element of the order-q subgroup")


def plaintext_size(m: int) -> int:
    """Bit length of the canonical encoding, used for the equal-size rule."""
    return m.bit_length()


# -- encryption -------------------------------------------------------------


def encrypt_with(pk, m: int, rho: int) -> Ciphertext:
    """Encrypt ``m`` using the explicit randomness ``rho``."""
    check_plaintext(pk, m)
    if isinstance(pk, PaillierPublicKey):
        n, n2 = pk.n, pk.n2
        if not 1 <= rho < n or math.gcd(rho, n) != 1:
            raise DomainError("Paillier randomness must be a unit mod n")
        # (n+1)^m = 1 + m n (mod n^2)
        return Ciphertext(pk.scheme_id, ((1 + m * n) * mod_pow(rho, n, n2) % n2,))
    if not 1 <= rho < pk.q:
        raise DomainError("ElGamal randomness must lie in [1, q-1]")
    return Ciphertext(pk.scheme_id, (mod_pow(pk.g, rho, pk.p), m * mod_pow(pk.h, rho, pk.p) % pk.p))


def sample_randomness(pk, rng: Rng) -> int:
    if pk.scheme_id.is_deterministic:
        return 1
    if isinstance(pk, PaillierPublicKey):
        while True:
            rho = rng.randint(1, pk.n - 1)
            if math.gcd(rho, pk.n) == 1:
                return rho
    return rng.randint(1, pk.q - 1)


def encrypt(pk, m: int, rng: Rng) -> Ciphertext:
    """Encrypt ``m``; the deterministic schemes ignore ``rng``."""
    return encrypt_with(pk, m, sample_randomness(pk, rng))


def _check_ciphertext(key, c: Ciphertext) -> None:
    if not isinstance(c, Ciphertext):
        raise DecodeError(f"expected Ciphertext, got {type(c).__name__}")
    if c.scheme_id != key.scheme_id:
        raise DomainError(f"ciphertext of scheme {c.scheme_id.value} used with {key.scheme_id.value} key")
    if isinstance(key, (PaillierPublicKey, PaillierSecretKey)):
        n2 = key.n * key.n
        if len(c.parts) != 1 or not 0 < c.parts[0] < n2 or math.gcd(c.parts[0], key.n) != 1:
            raise DecodeError("malformed Paillier ciphertext")
    else:
        if len(c.parts) != 2 or not all(0 < x < key.p for x in c.parts):
            raise DecodeError("malformed ElGamal ciphertext")


def decrypt(sk, c: Ciphertext) -> int:
    _check_ciphertext(sk, c)
    if isinstance(sk, PaillierSecretKey):
        n = sk.n
        u = mod_pow(c.parts[0], sk.lam, n * n)
        return (u - 1) // n * sk.mu % n
    c1, c2 = c.parts
    if mod_pow(c1, sk.q, sk.p) != 1:
        raise DecodeError("ElGamal ciphertext component outside the subgroup")
    return c2 * mod_pow(c1, sk.q - sk.x, sk.p) % sk.p


def encrypt_vector(pk, ms, rng: Rng) -> list[Ciphertext]:
    return [encrypt(pk, m, rng) for m in ms]


def decrypt_vector(sk, cs) -> list[int]:
    return [decrypt(sk, c) for c in cs]


# -- homomorphic operations -------------------------------------------------


def hom_op(pk, c: Ciphertext, c2: Ciphertext) -> Ciphertext:
    """Ciphertext product; decrypts to m + m' (additive) or m * m' (multiplicative)."""
    _check_ciphertext(pk, c)
    _check_ciphertext(pk, c2)
    mod = pk.n2 if isinstance(pk, PaillierPublicKey) else pk.p
    return Ciphertext(pk.scheme_id, tuple(a * b % mod for a, b in zip(c.parts, c2.parts)))


def hom_inv(pk, c: Ciphertext) -> Ciphertext:
    """Componentwise group inverse; decrypts to -m (additive) or m^-1 (multiplicative)."""
    _check_ciphertext(pk, c)
    mod = pk.n2 if isinstance(pk, PaillierPublicKey) else pk.p
    return Ciphertext(pk.scheme_id, tuple(mod_inv(a, mod) for a in c.parts))


def plaintext_op(pk, m: int, m2: int) -> int:
    """The plaintext operation the scheme's ``hom_op`` mirrors."""
    if isinstance(pk, PaillierPublicKey):
        return (m + m2) % pk.n
    return m * m2 % pk.p


# -- serialization ----------------------------------------------------------


def _pack(x: int) -> str:
    body = x.to_bytes((x.bit_length() + 7) // 8, "big")
    return (len(body).to_bytes(4, "big") + body).hex()


def _unpack(s: str) -> int:
    try:
        raw = bytes.fromhex(s)
    except (TypeError, ValueError) as exc:
        raise DecodeError(f"part is not hex: {s!r}") from exc
    if len(raw) < 4 or int.from_bytes(raw[:4], "big") != len(raw) - 4:
        raise DecodeError("length prefix does not match part size")
    return int.from_bytes(raw[4:], "big")


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _load_envelope(text: str, kind: str) -> dict:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DecodeError(f"envelope is not JSON: {exc}") from exc
    if not isinstance(obj, dict) or obj.get("version") != ENVELOPE_VERSION or obj.get("kind") != kind:
        raise DecodeError(f"not a version-{ENVELOPE_VERSION} {kind} envelope")
    return obj


def public_key_json(pk, lam: int) -> str:
    return _dumps({"version": ENVELOPE_VERSION, "kind": "public-key", "scheme_id": pk.scheme_id.value,
                   "lambda": lam, "parts": [_pack(x) for x in pk.parts()]})


def fingerprint(pk, lam: int) -> str:
    return hashlib.sha256(public_key_json(pk, lam).encode()).hexdigest()[:16]


def keypair_to_json(kp: KeyPair) -> str:
    return _dumps({"version": ENVELOPE_VERSION, "kind": "keypair", "scheme_id": kp.scheme_id.value,
                   "lambda": kp.lam, "pk": [_pack(x) for x in kp.pk.parts()],
                   "sk": [_pack(x) for x in kp.sk.parts()]})


def keypair_from_json(text: str) -> KeyPair:
    obj = _load_envelope(text, "keypair")
    sid = scheme_id(obj["scheme_id"])
    pk = [_unpack(s) for s in obj["pk"]]
    sk = [_unpack(s) for s in obj["sk"]]
    try:
        if sid.is_additive:
            (n,), (n_, lam, mu) = pk, sk
            kp = KeyPair(sid, obj["lambda"], PaillierPublicKey(sid, n), PaillierSecretKey(sid, n_, lam, mu))
        else:
            (p, q, g, h), (p_, q_, x) = pk, sk
            kp = KeyPair(sid, obj["lambda"], GroupPublicKey(sid, p, q, g, h), GroupSecretKey(sid, p_, q_, x))
    except ValueError as exc:
        raise DecodeError(f"wrong number of key parts for {sid.value}") from exc
    return kp


def ciphertext_to_json(c: Ciphertext, lam: int) -> str:
    return _dumps({"version": ENVELOPE_VERSION, "kind": "ciphertext", "scheme_id": c.scheme_id.value,
                   "lambda": lam, "parts": [_pack(x) for x in c.parts]})


def ciphertext_from_json(text: str) -> Ciphertext:
    obj = _load_envelope(text, "ciphertext")
    return Ciphertext(scheme_id(obj["scheme_id"]), tuple(_unpack(s) for s in obj["parts"]))
