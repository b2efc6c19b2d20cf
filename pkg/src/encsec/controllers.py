"""Static control laws u = f(y; K) and their encrypted counterparts.

Three families are provided:

* ``additive-bias``        u_i = y_i + K_i               (q = l = r)
* ``multiplicative-gain``  u_i = K_i * y_i               (q = l = r)
* ``static-feedback``      u = F y, K = row-major vec(F)  (r = q * l)

The first two are bijective in K for a fixed y, so their inverse laws exist
and can be evaluated on ciphertexts from the public key alone. Static
feedback is invertible only when q = r, i.e. l = 1. Its encrypted form
returns the q x l grid of ciphertext products and leaves the row sums to
the key holder (:func:`decrypt_and_aggregate`).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

from . import schemes
from .errors import DomainError, NotInvertible
from .modarith import Rng, mod_inv
from .schemes import Ciphertext, SchemeId


class Family(str, enum.Enum):
    ADDITIVE_BIAS = "additive-bias"
    MULTIPLICATIVE_GAIN = "multiplicative-gain"
    STATIC_FEEDBACK = "static-feedback"


QR_CONDITION = "inverse law requires q = r (equivalently l = 1) for static feedback"


@dataclass(frozen=True)
class ControlLaw:
    family: Family
    q: int
    l: int  # noqa: E741
    r: int

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if min(self.q, self.l, self.r) < 1:
            raise DomainError("law dimensions must be positive")
        if self.family is Family.STATIC_FEEDBACK:
            if self.r != self.q * self.l:
                raise DomainError(f"static feedback needs r = q*l, got r={self.r}")
        elif not self.q == self.l == self.r:
            raise DomainError(f"{self.family.value} needs q = l = r")

    @classmethod
    def additive_bias(cls, dim: int = 1) -> "ControlLaw":
        return cls(Family.ADDITIVE_BIAS, dim, dim, dim)

    @classmethod
    def multiplicative_gain(cls, dim: int = 1) -> "ControlLaw":
        return cls(Family.MULTIPLICATIVE_GAIN, dim, dim, dim)

    @classmethod
    def static_feedback(cls, q: int, l: int) -> "ControlLaw":  # noqa: E741
        return cls(Family.STATIC_FEEDBACK, q, l, q * l)

    @property
    def is_bijective(self) -> bool:
        """Whether f(y; .) is invertible for a fixed y."""
        return self.family is not Family.STATIC_FEEDBACK or self.q == self.r

    def check_invertible(self) -> None:
        if self.family is Family.STATIC_FEEDBACK and self.q != self.r:
            raise NotInvertible(f"{QR_CONDITION}; got q={self.q}, l={self.l}, r={self.r}")

    def gain_matrix(self, K):
        return [list(K[i * self.l:(i + 1) * self.l]) for i in range(self.q)]

    def to_dict(self) -> dict:
        return {"family": self.family.value, "q": self.q, "l": self.l, "r": self.r}

    def compatible_with(self, sid: SchemeId) -> bool:
        if self.family is Family.ADDITIVE_BIAS:
            return sid.is_additive
        return not sid.is_additive


def check_compatible(law: ControlLaw, sid) -> None:
    sid = schemes.scheme_id(sid)
    if not law.compatible_with(sid):
        need = "an additive" if law.family is Family.ADDITIVE_BIAS else "a multiplicative"
        raise DomainError(f"{law.family.value} must be paired with {need} scheme, not {sid.value}")


def _check_len(name, v, n):
    if len(v) != n:
        raise DomainError(f"{name} has length {len(v)}, expected {n}")


def eval_plain(law: ControlLaw, y, K, modulus: int | None = None) -> list:
    """f(y; K); arithmetic is reduced mod ``modulus`` when one is given."""
    _check_len("y", y, law.l)
    _check_len("K", K, law.r)
    if law.family is Family.ADDITIVE_BIAS:
        u = [a + b for a, b in zip(y, K)]
    elif law.family is Family.MULTIPLICATIVE_GAIN:
        u = [k * a for a, k in zip(y, K)]
    else:
        u = [sum(f * a for f, a in zip(row, y)) for row in law.gain_matrix(K)]
    return u if modulus is None else [x % modulus for x in u]


def eval_inverse_plain(law: ControlLaw, y, u, modulus: int) -> list[int]:
    """f^-1(y; u), so that f^-1(y; f(y; K)) = K."""
    law.check_invertible()
    _check_len("y", y, law.l)
    _check_len("u", u, law.q)
    if law.family is Family.ADDITIVE_BIAS:
        return [(b - a) % modulus for a, b in zip(y, u)]
    if law.family is Family.MULTIPLICATIVE_GAIN:
        return [b * mod_inv(a, modulus) % modulus for a, b in zip(y, u)]
    # static feedback with l = 1: u_i = F_i * y_1
    return [b * mod_inv(y[0], modulus) % modulus for b in u]


@dataclass(frozen=True)
class EncryptedController:
    """A law together with its encrypted parameter vector c_K."""

    law: ControlLaw
    pk: object
    cK: tuple[Ciphertext, ...]

    def __post_init__(self):
        check_compatible(self.law, self.pk.scheme_id)
        _check_len("cK", self.cK, self.law.r)


def encrypt_controller(law: ControlLaw, pk, K, rng: Rng) -> EncryptedController:
    _check_len("K", K, law.r)
    return EncryptedController(law, pk, tuple(schemes.encrypt_vector(pk, K, rng)))


def eval_encrypted(state: EncryptedController, cy) -> list:
    """f_Pi(c_y; c_K). Static feedback yields a q x l grid of products."""
    law, pk, cK = state.law, state.pk, state.cK
    _check_len("cy", cy, law.l)
    if law.family is Family.ADDITIVE_BIAS:
        return [schemes.hom_op(pk, a, k) for a, k in zip(cy, cK)]
    if law.family is Family.MULTIPLICATIVE_GAIN:
        return [schemes.hom_op(pk, k, a) for a, k in zip(cy, cK)]
    return [[schemes.hom_op(pk, f, a) for f, a in zip(row, cy)] for row in law.gain_matrix(cK)]


def eval_inverse_encrypted(law: ControlLaw, pk, cy, cu) -> list[Ciphertext]:
    """f^-1_Pi(c_y; c_u), built from the public key, ``hom_op`` and ``hom_inv`` only."""
    law.check_invertible()
    check_compatible(law, pk.scheme_id)
    _check_len("cy", cy, law.l)
    if law.family is Family.STATIC_FEEDBACK:
        # l = 1: the encrypted output is a q x 1 grid
        cu = [row[0] if isinstance(row, list) else row for row in cu]
        _check_len("cu", cu, law.q)
        return [schemes.hom_op(pk, c, schemes.hom_inv(pk, cy[0])) for c in cu]
    _check_len("cu", cu, law.q)
    return [schemes.hom_op(pk, c, schemes.hom_inv(pk, a)) for a, c in zip(cy, cu)]


def decrypt_and_aggregate(sk, law: ControlLaw, c_products, unembed=None) -> list[int]:
    """Key-holder side of static feedback: u_i = sum_j Dec(c_ij).

    ``unembed`` maps each decrypted subgroup element back to an integer
    before summing (see :func:`encsec.encoding.unembed`); the identity when omitted.
    """
    if law.family is not Family.STATIC_FEEDBACK:
        raise DomainError("decrypt_and_aggregate applies to static feedback only")
    if len(c_products) != law.q or any(len(row) != law.l for row in c_products):
        raise DomainError(f"product grid must be {law.q} x {law.l}")
    conv = unembed or (lambda m: m)
    return [sum(conv(schemes.decrypt(sk, c)) for c in row) for row in c_products]
