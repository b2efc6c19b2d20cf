"""Concrete adversaries, the two reductions, and the eavesdropping attack.

``reduce_pea_to_cpa`` turns a PEA adversary B into a CPA adversary A by
installing the CPA challenge ciphertext as the encrypted controller
parameter and answering B's oracle queries locally. ``reduce_cpa_to_pea``
goes the other way: it broadcasts A's scalar challenge to r-vectors, makes
one oracle query at a fixed input y, and peels c_K back out with the
encrypted inverse law before handing it to A.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import schemes
from .controllers import (
    ControlLaw,
    EncryptedController,
    Family,
    check_compatible,
    decrypt_and_aggregate,
    encrypt_controller,
    eval_encrypted,
    eval_inverse_encrypted,
)
from .encoding import DEFAULT_SCALE, Encoder, SubgroupEncoder, unembed
from .errors import DomainError, RankDeficient
from .games import AdvantageEstimate, CpaGame, OracleHandle, PeaGame, estimate_advantage
from .modarith import Rng

log = logging.getLogger(__name__)

# Both are perfect squares, so they lie in every safe-prime subgroup with
# p > 25 and in Z_n for every n >= 2**15; both are 5 bits long.
CHALLENGE_PAIR = (16, 25)
NO_MATCH = "anomaly: no candidate response matched the oracle output"


class RandomCpaGuesser:
    id = "random"
    game = "cpa"

    def challenge(self, pk, rng):
        m0, m1 = CHALLENGE_PAIR
        return m0, m1, None

    def guess(self, c, sigma, rng):
        return rng.bit()


@dataclass(frozen=True)
class RandomPeaGuesser:
    law: ControlLaw
    id = "random"
    game = "pea"

    def challenge(self, pk, rng):
        m0, m1 = CHALLENGE_PAIR
        return (m0,) * self.law.r, (m1,) * self.law.r, None

    def guess(self, oracle, sigma, rng):
        return rng.bit()


def random_guesser(game: str = "cpa", law: ControlLaw | None = None):
    if game == "cpa":
        return RandomCpaGuesser()
    if law is None:
        raise DomainError("a PEA random guesser needs the control law for its dimensions")
    return RandomPeaGuesser(law)


class DetCpaDistinguisher:
    """Re-encrypts m0 and compares with the challenge.

    Wins every game against a deterministic scheme; against a randomized
    one the comparison essentially never matches and the guess is always 1.
    """

    id = "det-cpa"
    game = "cpa"

    def challenge(self, pk, rng):
        m0, m1 = CHALLENGE_PAIR
        return m0, m1, (pk, m0)

    def guess(self, c, sigma, rng):
        pk, m0 = sigma
        return 0 if schemes.encrypt(pk, m0, rng) == c else 1


def det_cpa_distinguisher() -> DetCpaDistinguisher:
    return DetCpaDistinguisher()


@dataclass(frozen=True)
class DetPeaDistinguisher:
    """One oracle query at a chosen y, then recompute f_Pi for both candidates."""

    law: ControlLaw
    id = "det-pea"
    game = "pea"

    def __post_init__(self):
        if self.law.family is Family.STATIC_FEEDBACK:
            raise DomainError("det-pea supports additive-bias and multiplicative-gain laws")

    def probe_input(self) -> tuple[int, ...]:
        # 4 = 2^2 is a subgroup element; 3 is any additive plaintext
        v = 3 if self.law.family is Family.ADDITIVE_BIAS else 4
        return (v,) * self.law.l

    def challenge(self, pk, rng):
        m0, m1 = CHALLENGE_PAIR
        K0, K1 = (m0,) * self.law.r, (m1,) * self.law.r
        return K0, K1, (pk, K0, K1)

    def guess(self, oracle, sigma, rng):
        pk, K0, K1 = sigma
        cy = schemes.encrypt_vector(pk, self.probe_input(), rng)
        cu = oracle.query(cy)
        for j, K in enumerate((K0, K1)):
            if eval_encrypted(encrypt_controller(self.law, pk, K, rng), cy) == cu:
                return j
        log.debug(NO_MATCH)
        return 0, NO_MATCH


def det_pea_distinguisher(law: ControlLaw) -> DetPeaDistinguisher:
    return DetPeaDistinguisher(law)


@dataclass(frozen=True)
class PeaToCpa:
    """CPA adversary built from a PEA adversary B.

    The CPA challenge ciphertext c is installed as every entry of c_K in a
    locally simulated oracle. With r > 1 the challenge vectors are collapsed
    to their first entries (``collapse=True``).
    """

    inner: object
    law: ControlLaw
    collapse: bool = False
    budget: int | None = None
    game = "cpa"

    def __post_init__(self):
        if self.law.r > 1 and not self.collapse:
            raise DomainError(f"PEA-to-CPA wrapping needs r = 1 (got r={self.law.r}); pass collapse=True")

    @property
    def id(self) -> str:
        return f"pea-to-cpa({self.inner.id})"

    def challenge(self, pk, rng):
        K0, K1, sigma = self.inner.challenge(pk, rng)
        return K0[0], K1[0], (pk, sigma)

    def simulated_oracle(self, pk, c) -> OracleHandle:
        budget = self.budget or pk.plaintext_modulus.bit_length()
        return OracleHandle(EncryptedController(self.law, pk, (c,) * self.law.r), budget)

    def guess(self, c, sigma, rng):
        pk, inner_sigma = sigma
        return self.inner.guess(self.simulated_oracle(pk, c), inner_sigma, rng)


def reduce_pea_to_cpa(B, law: ControlLaw, sid=None, collapse: bool = False) -> PeaToCpa:
    if sid is not None:
        check_compatible(law, sid)
    return PeaToCpa(B, law, collapse)


def identity_input(law: ControlLaw, sid) -> tuple[int, ...]:
    """The fixed y used by the CPA-to-PEA wrapper: the group identity."""
    return (0 if schemes.scheme_id(sid).is_additive else 1,) * law.l


@dataclass(frozen=True)
class CpaToPea:
    """PEA adversary built from a CPA adversary A; issues exactly one oracle query."""

    inner: object
    law: ControlLaw
    game = "pea"

    def __post_init__(self):
        self.law.check_invertible()

    @property
    def id(self) -> str:
        return f"cpa-to-pea({self.inner.id})"

    def challenge(self, pk, rng):
        k0, k1, sigma = self.inner.challenge(pk, rng)
        y = identity_input(self.law, pk.scheme_id)
        return (k0,) * self.law.r, (k1,) * self.law.r, (sigma, y, pk)

    def guess(self, oracle, sigma, rng):
        inner_sigma, y, pk = sigma
        cy = schemes.encrypt_vector(pk, y, rng)
        cu = oracle.query(cy)
        cK_hat = eval_inverse_encrypted(self.law, pk, cy, cu)
        return self.inner.guess(cK_hat[0], inner_sigma, rng)


def reduce_cpa_to_pea(A, law: ControlLaw, sid=None) -> CpaToPea:
    if not law.is_bijective:
        law.check_invertible()
    if sid is not None:
        check_compatible(law, sid)
    return CpaToPea(A, law)


ADVERSARIES = {
    "random": {"cpa": lambda law: RandomCpaGuesser(), "pea": RandomPeaGuesser},
    "det-cpa": {"cpa": lambda law: DetCpaDistinguisher()},
    "det-pea": {"pea": DetPeaDistinguisher},
}


def make_adversary(adv_id: str, game: str, law: ControlLaw | None = None):
    if adv_id not in ADVERSARIES:
        raise DomainError(f"unknown adversary {adv_id!r}; choose from {', '.join(ADVERSARIES)}")
    kinds = ADVERSARIES[adv_id]
    if game not in kinds:
        raise DomainError(f"adversary {adv_id!r} does not play the IND-{game.upper()} game")
    if game == "pea" and law is None:
        raise DomainError("PEA adversaries need a control law")
    return kinds[game](law)


@dataclass
class ReductionReport:
    direction: str
    inner_id: str
    inner_game: str
    outer_game: str
    advantage_inner: AdvantageEstimate
    advantage_outer: AdvantageEstimate
    trials: int

    @property
    def gap(self) -> float:
        return abs(self.advantage_inner.advantage - self.advantage_outer.advantage)

    @property
    def cis_overlap(self) -> bool:
        (a_lo, a_hi), (b_lo, b_hi) = self.advantage_inner.ci, self.advantage_outer.ci
        return a_lo <= b_hi and b_lo <= a_hi

    def to_dict(self) -> dict:
        return {"direction": self.direction, "inner_adversary": self.inner_id,
                "inner_game": self.inner_game, "outer_game": self.outer_game,
                "advantage_inner": self.advantage_inner.to_dict(),
                "advantage_outer": self.advantage_outer.to_dict(),
                "gap": self.gap, "cis_overlap": self.cis_overlap, "trials": self.trials}


def run_reduction(direction: str, sid, law: ControlLaw, lam: int, inner_id: str, trials: int, seed,
                  budget: int | None = None, collapse: bool = False, workers: int = 1) -> ReductionReport:
    """Estimate the inner adversary directly and through the wrapper."""
    root = Rng(seed)
    cpa = CpaGame(schemes.scheme_id(sid).value, lam)
    pea = PeaGame(schemes.scheme_id(sid).value, law, lam, budget)
    if direction == "pea-to-cpa":
        inner = make_adversary(inner_id, "pea", law)
        outer = reduce_pea_to_cpa(inner, law, sid, collapse=collapse)
        inner_game, outer_game = pea, cpa
    elif direction == "cpa-to-pea":
        inner = make_adversary(inner_id, "cpa")
        outer = reduce_cpa_to_pea(inner, law, sid)
        inner_game, outer_game = cpa, pea
    else:
        raise DomainError(f"unknown reduction direction {direction!r}")
    adv_in = estimate_advantage(inner_game, inner, trials, root.child("inner").seed, workers)
    adv_out = estimate_advantage(outer_game, outer, trials, root.child("outer").seed, workers)
    return ReductionReport(direction, inner.id, inner_game.id, outer_game.id, adv_in, adv_out, trials)


# -- parameter estimation by eavesdropping ----------------------------------


def least_squares_estimation(samples) -> np.ndarray:
    """argmin_F sum ||u - F y||^2 over (y, u) samples, via the normal equations."""
    Y = np.array([np.atleast_1d(np.asarray(y, dtype=float)) for y, _ in samples])
    U = np.array([np.atleast_1d(np.asarray(u, dtype=float)) for _, u in samples])
    if Y.ndim != 2 or len(Y) == 0:
        raise RankDeficient("no samples")
    if np.linalg.matrix_rank(Y) < Y.shape[1]:
        raise RankDeficient(f"stacked outputs have rank {np.linalg.matrix_rank(Y)} < {Y.shape[1]}")
    return np.linalg.solve(Y.T @ Y, Y.T @ U).T


def relative_error(F_hat, F) -> float:
    F = np.asarray(F, dtype=float)
    return float(np.linalg.norm(np.asarray(F_hat) - F) / np.linalg.norm(F))


@dataclass
class EavesdropReport:
    F: list
    samples: int
    lam: int
    plaintext_error: float
    ciphertext_error: float
    decrypted_error: float
    F_hat_plaintext: list
    F_hat_ciphertext: list

    def to_dict(self) -> dict:
        return dict(vars(self))


def _traces(F, n, lam, scale, rng, y_range):
    F = np.asarray(F, dtype=float)
    q, l = F.shape  # noqa: E741
    law = ControlLaw.static_feedback(q, l)
    kp = schemes.keygen(schemes.SchemeId.MULTIPLICATIVE, lam, rng.child("keygen"))
    p = kp.pk.p
    enc = SubgroupEncoder(p, scale)
    # Eve reads ciphertext values with the public signed fixed-point convention
    eve = Encoder(p, scale)
    ctrl = encrypt_controller(law, kp.pk, [enc.encode(f) for f in F.ravel()], rng.child("gains"))
    srng, erng = rng.child("signals"), rng.child("encrypt")
    plain, cipher, decrypted = [], [], []
    for _ in range(n):
        y = np.array([srng.uniform(*y_range) for _ in range(l)])
        plain.append((y, F @ y))
        cy = [schemes.encrypt(kp.pk, enc.encode(v), erng) for v in y]
        grid = eval_encrypted(ctrl, cy)
        cipher.append(([eve.decode(c.parts[1]) for c in cy],
                       [sum(eve.decode(c.parts[1]) for c in row) for row in grid]))
        u = decrypt_and_aggregate(kp.sk, law, grid, lambda w: unembed(w, p))
        decrypted.append(([enc.decode(c) for c in schemes.decrypt_vector(kp.sk, cy)],
                          [v / scale**2 for v in u]))
    return plain, cipher, decrypted


def eavesdrop_demo(F, samples: int = 50, lam: int = 128, seed=0, scale: int = DEFAULT_SCALE,
                   y_range=(0.5, 4.0)) -> EavesdropReport:
    """Eve fits F by least squares on plaintext and on ciphertext traffic.

    The encrypted controller is static feedback over the multiplicative
    scheme, so gains and outputs must be positive.
    """
    rng = Rng(seed)
    for attempt in range(2):
        plain, cipher, decrypted = _traces(F, samples, lam, scale, rng, y_range)
        try:
            F_plain = least_squares_estimation(plain)
            F_cipher = least_squares_estimation(cipher)
            F_dec = least_squares_estimation(decrypted)
            break
        except RankDeficient:
            if attempt:
                raise
            rng = rng.child("retry")
    return EavesdropReport(
        F=np.asarray(F, dtype=float).tolist(), samples=samples, lam=lam,
        plaintext_error=relative_error(F_plain, F), ciphertext_error=relative_error(F_cipher, F),
        decrypted_error=relative_error(F_dec, F),
        F_hat_plaintext=F_plain.tolist(), F_hat_ciphertext=F_cipher.tolist())
