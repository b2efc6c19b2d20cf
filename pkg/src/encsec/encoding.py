"""Fixed-point encoding of real numbers into plaintext spaces.

:class:`Encoder` maps reals onto Z_space with a two's-complement style sign
convention, which makes additive homomorphism sign-correct for free.

The multiplicative scheme only accepts elements of the order-q subgroup of
Z_p^*, so :class:`SubgroupEncoder` composes fixed-point scaling with the
squaring embedding ``v -> v^2 mod p`` on ``v in [1, q]``. Squaring is a
bijection from [1, q] onto the subgroup and commutes with products, so a
product of k encodings decodes after dividing by ``scale**k``. The
embedding loses the sign (v and p - v square to the same element), hence
only positive values are representable.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError, EncodingOverflow
from .modarith import mod_pow

DEFAULT_SCALE = 1 << 16


def _check_scale(scale: int) -> None:
    if not isinstance(scale, int) or scale < 2 or scale & (scale - 1):
        raise DomainError(f"scale must be a power of two >= 2, got {scale!r}")


@dataclass(frozen=True)
class Encoder:
    space: int
    scale: int = DEFAULT_SCALE

    def __post_init__(self):
        _check_scale(self.scale)
        if self.space < 2 * self.scale:
            raise DomainError("plaintext space too small for this scale")

    @property
    def half(self) -> int:
        return self.space // 2

    @property
    def bound(self) -> float:
        """Exclusive bound on |x|."""
        return self.space / (2 * self.scale)

    def encode(self, x: float) -> int:
        if not abs(x) < self.bound:
            raise EncodingOverflow(f"|{x}| >= {self.bound}; value not representable")
        # float * power of two is exact; round() is half-to-even
        v = round(abs(x) * self.scale)
        if v >= self.half:
            raise EncodingOverflow(f"{x} rounds outside the representable range")
        return v if x >= 0 else (self.space - v) % self.space

    def decode(self, m: int) -> float:
        if not 0 <= m < self.space:
            raise DomainError(f"plaintext {m} outside [0, {self.space})")
        if m < self.half:
            return m / self.scale
        return -((self.space - m) / self.scale)


def embed(v: int, p: int) -> int:
    """Map ``v in [1, q]`` to the subgroup element ``v^2 mod p`` (p = 2q + 1)."""
    q = (p - 1) // 2
    if not 1 <= v <= q:
        raise EncodingOverflow(f"{v} outside the embeddable range [1, {q}]")
    return v * v % p


def unembed(w: int, p: int) -> int:
    """Inverse of :func:`embed`: the square root of ``w`` lying in [1, q].

    Uses the p = 3 (mod 4) square-root formula, valid for every safe prime p > 7.
    """
    if not 1 <= w < p:
        raise DomainError(f"{w} is not a unit mod {p}")
    s = mod_pow(w, (p + 1) // 4, p)
    if s * s % p != w:
        raise DomainError(f"{w} is not a subgroup element mod {p}")
    return min(s, p - s)


@dataclass(frozen=True)
class SubgroupEncoder:
    p: int
    scale: int = DEFAULT_SCALE

    def __post_init__(self):
        _check_scale(self.scale)

    @property
    def q(self) -> int:
        return (self.p - 1) // 2

    def encode(self, x: float) -> int:
        if not x > 0:
            raise EncodingOverflow(f"subgroup encoding represents positive values only, got {x}")
        v = round(x * self.scale)
        if v < 1:
            raise EncodingOverflow(f"{x} rounds to zero at scale {self.scale}")
        return embed(v, self.p)

    def decode(self, w: int, factors: int = 1) -> float:
        """Decode a product of ``factors`` encodings (one rescale per factor)."""
        return unembed(w, self.p) / self.scale**factors
