"""IND-CPA and IND-PEA games and Monte-Carlo advantage estimation.

Adversaries are plain objects with two methods and no per-game state; the
intermediate state sigma travels explicitly between the phases.

CPA adversary::

    challenge(pk, rng) -> (m0, m1, sigma)
    guess(c, sigma, rng) -> bit

PEA adversary::

    challenge(pk, rng) -> (K0, K1, sigma)      # vectors of length r
    guess(oracle, sigma, rng) -> bit

``guess`` may instead return ``(bit, note)`` to attach a note to the
transcript. PEA adversaries never see pk in ``guess``; whatever they need
must be forwarded through sigma.

Each game draws keys, the hidden bit, the challenger's encryption
randomness and the adversary's coins from separate child streams of the
trial seed, so a transcript is a pure function of (seed, configuration).
"""
from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from scipy import stats

from . import schemes
from .controllers import ControlLaw, EncryptedController, check_compatible, encrypt_controller, eval_encrypted
from .errors import BudgetExceeded, DomainError
from .modarith import Rng, normalize_seed
from .schemes import Ciphertext, scheme_id

log = logging.getLogger(__name__)

TRANSCRIPT_VERSION = 1
MIN_TRIALS = 100
CONSISTENT = "consistent-with-negligible"
NON_NEGLIGIBLE = "non-negligible-at-this-λ"


def _ct_json(obj):
    if isinstance(obj, Ciphertext):
        return obj.hex()
    return [_ct_json(x) for x in obj]


class OracleHandle:
    """Encrypted-control oracle: answers f_Pi(c_y; c_K) for the hidden c_K.

    The public surface is ``query``, ``budget`` and ``queries_used``.
    """

    __slots__ = ("_controller", "_log", "budget", "queries_used")

    def __init__(self, controller: EncryptedController, budget: int):
        if budget < 1:
            raise DomainError("oracle budget must be >= 1")
        self._controller = controller
        self._log = []
        self.budget = budget
        self.queries_used = 0

    def query(self, cy):
        if self.queries_used >= self.budget:
            raise BudgetExceeded(f"oracle budget of {self.budget} queries exhausted")
        cy = list(cy)
        cu = eval_encrypted(self._controller, cy)
        self.queries_used += 1
        self._log.append((cy, cu))
        return cu


@dataclass
class GameTranscript:
    game: str
    seed: str
    lam: int
    scheme_id: str
    pk_fingerprint: str
    challenge: list
    b: int | None
    guess: int | None
    win: bool
    law: dict | None = None
    queries: list = field(default_factory=list)
    forfeit: str | None = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "version": TRANSCRIPT_VERSION,
            "game": self.game,
            "seed": self.seed,
            "lambda": self.lam,
            "scheme_id": self.scheme_id,
            "pk_fingerprint": self.pk_fingerprint,
            "law": self.law,
            "challenge": self.challenge,
            "b": self.b,
            "guess": self.guess,
            "win": self.win,
            "forfeit": self.forfeit,
            "queries": self.queries,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)

    def hash(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()

    @property
    def queries_used(self) -> int:
        return len(self.queries)


def _split_guess(out):
    if isinstance(out, tuple):
        bit, note = out
        return bit, [str(note)]
    return out, []


def _valid_bit(x) -> bool:
    return not isinstance(x, bool) and x in (0, 1)


def _pair_violation(pk, x0, x1) -> str | None:
    for x in (x0, x1):
        if not schemes.is_valid_plaintext(pk, x):
            return f"challenge {x!r} is not in the plaintext space"
    if x0 == x1:
        return "challenge plaintexts are equal"
    if schemes.plaintext_size(x0) != schemes.plaintext_size(x1):
        return "challenge plaintexts differ in size"
    return None


def _vector_violation(pk, r, K0, K1) -> str | None:
    try:
        K0, K1 = list(K0), list(K1)
    except TypeError:
        return "challenge parameters are not vectors"
    if len(K0) != r or len(K1) != r:
        return f"challenge parameters must have dimension r={r}"
    if K0 == K1:
        return "challenge parameters are equal"
    for k0, k1 in zip(K0, K1):
        for k in (k0, k1):
            if not schemes.is_valid_plaintext(pk, k):
                return f"challenge entry {k!r} is not in the plaintext space"
        if schemes.plaintext_size(k0) != schemes.plaintext_size(k1):
            return "challenge parameters differ in size"
    return None


def run_cpa_game(sid, lam: int, adversary, seed) -> GameTranscript:
    sid = scheme_id(sid)
    seed = normalize_seed(seed)
    root = Rng(seed)
    kp = schemes.keygen(sid, lam, root.child("keygen"))
    arng = root.child("adversary")
    tr = GameTranscript("ind-cpa", seed.hex(), lam, sid.value, schemes.fingerprint(kp.pk, lam),
                        challenge=[], b=None, guess=None, win=False)

    m0, m1, sigma = adversary.challenge(kp.pk, arng)
    tr.challenge = [m0, m1]
    bad = _pair_violation(kp.pk, m0, m1)
    if bad:
        tr.forfeit = bad
        return tr

    b = root.child("challenger").bit()
    c = schemes.encrypt(kp.pk, (m0, m1)[b], root.child("encrypt"))
    tr.b = b
    try:
        out = adversary.guess(c, sigma, arng)
    except BudgetExceeded as exc:
        # a wrapped PEA adversary overran its simulated oracle
        tr.forfeit = str(exc)
        return tr
    bit, tr.notes = _split_guess(out)
    if not _valid_bit(bit):
        tr.forfeit = f"guess {bit!r} is not a bit"
        return tr
    tr.guess = bit
    tr.win = bit == b
    return tr


def run_pea_game(sid, law: ControlLaw, lam: int, adversary, oracle_budget: int, seed) -> GameTranscript:
    sid = scheme_id(sid)
    check_compatible(law, sid)
    if oracle_budget < 1:
        raise DomainError("oracle budget must be >= 1")
    seed = normalize_seed(seed)
    root = Rng(seed)
    kp = schemes.keygen(sid, lam, root.child("keygen"))
    arng = root.child("adversary")
    tr = GameTranscript("ind-pea", seed.hex(), lam, sid.value, schemes.fingerprint(kp.pk, lam),
                        challenge=[], b=None, guess=None, win=False, law=law.to_dict())

    K0, K1, sigma = adversary.challenge(kp.pk, arng)
    bad = _vector_violation(kp.pk, law.r, K0, K1)
    tr.challenge = [list(K0), list(K1)] if bad is None else [repr(K0), repr(K1)]
    if bad:
        tr.forfeit = bad
        return tr

    b = root.child("challenger").bit()
    controller = encrypt_controller(law, kp.pk, (K0, K1)[b], root.child("encrypt"))
    oracle = OracleHandle(controller, oracle_budget)
    tr.b = b
    try:
        out = adversary.guess(oracle, sigma, arng)
    except BudgetExceeded as exc:
        out = None
        tr.forfeit = str(exc)
    tr.queries = [{"query": _ct_json(cy), "response": _ct_json(cu)} for cy, cu in oracle._log]
    if tr.forfeit:
        return tr
    bit, tr.notes = _split_guess(out)
    if not _valid_bit(bit):
        tr.forfeit = f"guess {bit!r} is not a bit"
        return tr
    tr.guess = bit
    tr.win = bit == b
    return tr


@dataclass(frozen=True)
class CpaGame:
    scheme: str
    lam: int
    id = "ind-cpa"

    def play(self, adversary, seed) -> GameTranscript:
        return run_cpa_game(self.scheme, self.lam, adversary, seed)

    def describe(self) -> dict:
        return {"game": self.id, "scheme": scheme_id(self.scheme).value, "lambda": self.lam}


@dataclass(frozen=True)
class PeaGame:
    scheme: str
    law: ControlLaw
    lam: int
    budget: int | None = None
    id = "ind-pea"

    @property
    def oracle_budget(self) -> int:
        # default: lambda queries
        return self.lam if self.budget is None else self.budget

    def play(self, adversary, seed) -> GameTranscript:
        return run_pea_game(self.scheme, self.law, self.lam, adversary, self.oracle_budget, seed)

    def describe(self) -> dict:
        return {"game": self.id, "scheme": scheme_id(self.scheme).value, "lambda": self.lam,
                "law": self.law.to_dict(), "budget": self.oracle_budget}


def clopper_pearson(k: int, n: int, alpha: float = 0.05) -> tuple[float, float]:
    """Exact two-sided binomial confidence interval for k successes in n trials."""
    if n < 1 or not 0 <= k <= n:
        raise DomainError(f"need 0 <= k <= n and n >= 1, got k={k}, n={n}")
    lo = 0.0 if k == 0 else float(stats.beta.ppf(alpha / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(stats.beta.ppf(1 - alpha / 2, k + 1, n - k))
    return lo, hi


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    b: int | None
    guess: int | None
    win: bool
    queries: int
    forfeit: str | None
    hash: str


@dataclass
class AdvantageEstimate:
    trials: int
    wins: int
    ci: tuple[float, float]
    transcript_hash: str = ""
    forfeits: int = 0
    records: list = field(default_factory=list, repr=False, compare=False)

    @property
    def rate(self) -> float:
        return self.wins / self.trials

    @property
    def advantage(self) -> float:
        return abs(self.rate - 0.5)

    @property
    def verdict(self) -> str:
        lo, hi = self.ci
        return CONSISTENT if lo <= 0.5 <= hi else NON_NEGLIGIBLE

    @property
    def ci_halfwidth(self) -> float:
        return (self.ci[1] - self.ci[0]) / 2

    @classmethod
    def from_counts(cls, wins: int, trials: int, **kw) -> "AdvantageEstimate":
        return cls(trials, wins, clopper_pearson(wins, trials), **kw)

    def to_dict(self) -> dict:
        return {"trials": self.trials, "wins": self.wins, "rate": self.rate,
                "advantage": self.advantage, "ci": list(self.ci), "verdict": self.verdict,
                "forfeits": self.forfeits, "transcript_hash": self.transcript_hash}


def trial_seed(seed, i: int) -> bytes:
    return Rng(seed).child("trial", i).seed


def _play_one(args):
    game, adversary, seed, i = args
    tr = game.play(adversary, trial_seed(seed, i))
    return TrialRecord(i, tr.b, tr.guess, tr.win, tr.queries_used, tr.forfeit, tr.hash())


def estimate_advantage(game, adversary, trials: int, seed, workers: int = 1) -> AdvantageEstimate:
    """Play ``trials`` independently seeded games and summarise the win rate.

    Trial i is seeded from ``(seed, i)``, so results do not depend on
    ``workers``; records come back in trial order.
    """
    if trials < MIN_TRIALS:
        raise DomainError(f"trials must be >= {MIN_TRIALS}, got {trials}")
    seed = normalize_seed(seed)
    jobs = [(game, adversary, seed, i) for i in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_play_one, jobs, chunksize=max(1, trials // (8 * workers))))
    else:
        records = [_play_one(j) for j in jobs]
    digest = hashlib.sha256("".join(r.hash for r in records).encode()).hexdigest()
    wins = sum(r.win for r in records)
    forfeits = sum(r.forfeit is not None for r in records)
    log.debug("%s: %d/%d wins", getattr(adversary, "id", adversary), wins, trials)
    return AdvantageEstimate.from_counts(wins, trials, transcript_hash=digest, forfeits=forfeits,
                                         records=records)
