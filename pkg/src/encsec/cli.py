"""Command-line experiment runner.

Subcommands: ``keygen``, ``run-cpa``, ``run-pea``, ``reduce`` and
``demo-eavesdrop``. Settings come from flags, optionally layered over a
flat ``key = value`` config file given with ``--config`` (flags win).

Exit codes: 0 success, 2 usage error, 3 runtime failure.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from . import schemes
from .adversaries import ADVERSARIES, eavesdrop_demo, make_adversary, run_reduction
from .controllers import ControlLaw, Family, check_compatible
from .encoding import DEFAULT_SCALE
from .errors import DomainError, EncsecError
from .games import MIN_TRIALS, CpaGame, PeaGame, estimate_advantage
from .modarith import Rng

OUTPUT_VERSION = 1
EXIT_USAGE = 2
EXIT_RUNTIME = 3

log = logging.getLogger("encsec")


class UsageError(Exception):
    pass


@dataclass
class ExperimentConfig:
    scheme: str = "additive"
    lam: int = 512
    law: str | None = None
    dims: str = "1"
    gains: str | None = None
    adversary: str = "random"
    trials: int = 1000
    budget: int | None = None
    seed: int = 0
    scale: int = DEFAULT_SCALE
    direction: str = "pea-to-cpa"
    collapse: bool = False
    samples: int = 50
    workers: int = 1
    out: str | None = None
    csv: str | None = None

    def scheme_id(self):
        try:
            return schemes.scheme_id(self.scheme)
        except DomainError as exc:
            raise UsageError(f"scheme: {exc}") from None

    def control_law(self) -> ControlLaw:
        sid = self.scheme_id()
        family = self.law or (Family.ADDITIVE_BIAS.value if sid.is_additive else Family.MULTIPLICATIVE_GAIN.value)
        try:
            family = Family(family)
        except ValueError:
            raise UsageError(f"law: unknown family {family!r}; choose from "
                             f"{', '.join(f.value for f in Family)}") from None
        try:
            parts = [int(x) for x in str(self.dims).lower().split("x")]
            if family is Family.STATIC_FEEDBACK:
                q, l = parts if len(parts) == 2 else (parts[0], 1)  # noqa: E741
                return ControlLaw.static_feedback(q, l)
            if len(parts) != 1:
                raise ValueError
            return ControlLaw(family, parts[0], parts[0], parts[0])
        except (ValueError, DomainError) as exc:
            raise UsageError(f"dims: invalid dimensions {self.dims!r} for {family.value} ({exc})") from None


_INT_FIELDS = {"lam", "trials", "budget", "seed", "scale", "samples", "workers"}
_KEY_ALIASES = {"lambda": "lam", "oracle_budget": "budget"}


def load_config(path: str) -> dict:
    """Read a flat ``key = value`` file (``#`` comments allowed)."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    try:
        text = Path(path).read_text()
        parser.read_string("[experiment]\n" + text)
    except OSError as exc:
        raise UsageError(f"config: cannot read {path}: {exc.strerror}") from None
    except configparser.Error as exc:
        raise UsageError(f"config: {exc}") from None
    known = {f.name for f in fields(ExperimentConfig)}
    out = {}
    for key, value in parser["experiment"].items():
        key = _KEY_ALIASES.get(key.replace("-", "_"), key.replace("-", "_"))
        if key not in known:
            raise UsageError(f"config: unknown field {key!r}")
        out[key] = value
    return out


def _coerce(name: str, value):
    if value is None:
        return None
    if name in _INT_FIELDS:
        try:
            return int(value)
        except (TypeError, ValueError):
            raise UsageError(f"{name.replace('lam', 'lambda')}: expected an integer, got {value!r}") from None
    if name == "collapse" and isinstance(value, str):
        return value.strip().lower() in ("1", "true", "yes", "on")
    return value


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    base = load_config(args.config) if getattr(args, "config", None) else {}
    kw = {}
    for f in fields(ExperimentConfig):
        flag = getattr(args, f.name, None)
        value = base.get(f.name) if flag is None or flag is False else flag
        if value is not None:
            kw[f.name] = _coerce(f.name, value)
    cfg = ExperimentConfig(**kw)
    if cfg.lam < schemes.MIN_LAMBDA:
        raise UsageError(f"lambda: must be >= {schemes.MIN_LAMBDA}, got {cfg.lam}")
    if cfg.scheme_id().is_additive and cfg.lam % 2:
        raise UsageError(f"lambda: additive schemes need an even value, got {cfg.lam}")
    if cfg.trials < 1:
        raise UsageError(f"trials: must be >= 1, got {cfg.trials}")
    if cfg.budget is not None and cfg.budget < 1:
        raise UsageError(f"budget: must be >= 1, got {cfg.budget}")
    if not 0 <= cfg.seed < 1 << 256:
        raise UsageError("seed: must lie in [0, 2**256)")
    if cfg.workers < 1:
        raise UsageError("workers: must be >= 1")
    return cfg


def _check_trials(cfg):
    if cfg.trials < MIN_TRIALS:
        raise UsageError(f"trials: advantage estimation needs >= {MIN_TRIALS} trials, got {cfg.trials}")


def _adversary_id(cfg):
    if cfg.adversary not in ADVERSARIES:
        raise UsageError(f"adversary: unknown id {cfg.adversary!r}; choose from {', '.join(ADVERSARIES)}")
    return cfg.adversary


def _emit(cfg, args, payload: dict, human: list[str]) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    if args.json:
        sys.stdout.write(text)
    else:
        print("\n".join(human))


def _config_summary(cfg, law=None) -> dict:
    d = {"scheme": cfg.scheme_id().value, "lambda": cfg.lam, "adversary": cfg.adversary,
         "trials": cfg.trials, "seed": cfg.seed}
    if law is not None:
        d["law"] = law.to_dict()
    return d


def cmd_keygen(cfg: ExperimentConfig, args) -> int:
    sid = cfg.scheme_id()
    kp = schemes.keygen(sid, cfg.lam, Rng(cfg.seed).child("keygen"))
    out = Path(cfg.out or f"{sid.value}-{cfg.lam}.key.json")
    out.write_text(schemes.keypair_to_json(kp) + "\n")
    fp = schemes.fingerprint(kp.pk, kp.lam)
    if args.json:
        print(json.dumps({"version": OUTPUT_VERSION, "command": "keygen", "path": str(out),
                          "scheme": sid.value, "lambda": kp.lam, "fingerprint": fp}, sort_keys=True))
    else:
        print(f"wrote {out}  scheme={sid.value} lambda={kp.lam} fingerprint={fp}")
    return 0


def _write_csv(path, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["trial", "b", "b_hat", "win", "queries"])
        for r in records:
            w.writerow([r.trial, "" if r.b is None else r.b, "" if r.guess is None else r.guess,
                        int(r.win), r.queries])


def _run(cfg: ExperimentConfig, args, game_kind: str) -> int:
    _check_trials(cfg)
    adv_id = _adversary_id(cfg)
    sid = cfg.scheme_id()
    law = None
    if game_kind == "cpa":
        game = CpaGame(sid.value, cfg.lam)
    else:
        law = cfg.control_law()
        try:
            check_compatible(law, sid)
        except DomainError as exc:
            raise UsageError(f"law: {exc}") from None
        game = PeaGame(sid.value, law, cfg.lam, cfg.budget)
    try:
        adversary = make_adversary(adv_id, game_kind, law)
    except DomainError as exc:
        raise UsageError(f"adversary: {exc}") from None
    est = estimate_advantage(game, adversary, cfg.trials, cfg.seed, cfg.workers)
    if cfg.csv:
        _write_csv(cfg.csv, est.records)
    payload = {"version": OUTPUT_VERSION, "command": f"run-{game_kind}", "game": game.describe(),
               "config": _config_summary(cfg, law), **est.to_dict()}
    lo, hi = est.ci
    human = [f"{game.id} scheme={sid.value} lambda={cfg.lam} adversary={adversary.id}",
             f"wins {est.wins}/{est.trials}  rate={est.rate:.4f}  advantage={est.advantage:.4f}",
             f"95% CI [{lo:.4f}, {hi:.4f}]  verdict: {est.verdict}",
             f"transcript hash {est.transcript_hash}"]
    _emit(cfg, args, payload, human)
    return 0


def cmd_run_cpa(cfg, args) -> int:
    return _run(cfg, args, "cpa")


def cmd_run_pea(cfg, args) -> int:
    return _run(cfg, args, "pea")


def cmd_reduce(cfg: ExperimentConfig, args) -> int:
    _check_trials(cfg)
    adv_id = _adversary_id(cfg)
    sid = cfg.scheme_id()
    law = cfg.control_law()
    if cfg.direction not in ("pea-to-cpa", "cpa-to-pea"):
        raise UsageError(f"direction: must be pea-to-cpa or cpa-to-pea, got {cfg.direction!r}")
    try:
        report = run_reduction(cfg.direction, sid, law, cfg.lam, adv_id, cfg.trials, cfg.seed,
                               budget=cfg.budget, collapse=cfg.collapse, workers=cfg.workers)
    except DomainError as exc:
        raise UsageError(f"law: {exc}") from None
    payload = {"version": OUTPUT_VERSION, "command": "reduce", "config": _config_summary(cfg, law),
               **report.to_dict()}
    a, b = report.advantage_inner, report.advantage_outer
    human = [f"{report.direction}: inner {report.inner_id} in {report.inner_game}, wrapped in {report.outer_game}",
             f"inner advantage {a.advantage:.4f} CI [{a.ci[0]:.4f}, {a.ci[1]:.4f}]",
             f"outer advantage {b.advantage:.4f} CI [{b.ci[0]:.4f}, {b.ci[1]:.4f}]",
             f"gap {report.gap:.4f}  CIs overlap: {report.cis_overlap}"]
    _emit(cfg, args, payload, human)
    return 0


def _parse_gains(cfg: ExperimentConfig, law: ControlLaw):
    text = cfg.gains or "2,0.5"
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"gains: expected comma-separated numbers, got {text!r}") from None
    if len(vals) != law.r:
        raise UsageError(f"gains: need {law.r} values for a {law.q}x{law.l} gain, got {len(vals)}")
    return law.gain_matrix(vals)


def cmd_demo_eavesdrop(cfg: ExperimentConfig, args) -> int:
    if cfg.law is None:
        cfg.law = Family.STATIC_FEEDBACK.value
        if cfg.dims == "1":
            cfg.dims = "1x2"
    law = cfg.control_law()
    if law.family is not Family.STATIC_FEEDBACK:
        raise UsageError("law: the eavesdropping demo needs a static-feedback law")
    F = _parse_gains(cfg, law)
    try:
        report = eavesdrop_demo(F, samples=cfg.samples, lam=cfg.lam, seed=cfg.seed, scale=cfg.scale)
    except DomainError as exc:
        raise UsageError(f"gains: {exc}") from None
    payload = {"version": OUTPUT_VERSION, "command": "demo-eavesdrop", **report.to_dict()}
    human = [f"eavesdropping on u = F y with F = {report.F}, {report.samples} samples, lambda={report.lam}",
             f"{'traffic':<12}{'relative error of F_hat':>26}",
             f"{'plaintext':<12}{report.plaintext_error:>26.3e}",
             f"{'ciphertext':<12}{report.ciphertext_error:>26.3e}",
             f"(key holder, decrypted: {report.decrypted_error:.3e})"]
    _emit(cfg, args, payload, human)
    return 0


COMMANDS = {
    "keygen": cmd_keygen,
    "run-cpa": cmd_run_cpa,
    "run-pea": cmd_run_pea,
    "reduce": cmd_reduce,
    "demo-eavesdrop": cmd_demo_eavesdrop,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file; flags override it")
    common.add_argument("--scheme", choices=[s.value for s in schemes.SchemeId])
    common.add_argument("--lambda", dest="lam", type=int, help="security parameter in bits (default 512)")
    common.add_argument("--law", choices=[f.value for f in Family])
    common.add_argument("--dims", help="law dimensions: N for bias/gain, QxL for static feedback")
    common.add_argument("--gains", help="comma-separated gain entries, row-major")
    common.add_argument("--adversary", help=f"one of {', '.join(ADVERSARIES)}")
    common.add_argument("--trials", type=int)
    common.add_argument("--budget", type=int, help="oracle query budget (default lambda)")
    common.add_argument("--seed", type=int)
    common.add_argument("--scale", type=int, help="fixed-point scale, a power of two")
    common.add_argument("--workers", type=int, help="parallel worker processes")
    common.add_argument("--json", action="store_true", help="print machine-readable JSON on stdout")
    common.add_argument("--out", help="output file")
    common.add_argument("--csv", help="per-trial CSV output")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="encsec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("keygen", parents=[common], help="generate and store a key pair")
    sub.add_parser("run-cpa", parents=[common], help="estimate an IND-CPA advantage")
    sub.add_parser("run-pea", parents=[common], help="estimate an IND-PEA advantage")
    red = sub.add_parser("reduce", parents=[common], help="compare an adversary with its reduction")
    red.add_argument("--direction", choices=["pea-to-cpa", "cpa-to-pea"])
    red.add_argument("--collapse", action="store_true", help="collapse r > 1 challenges to their first entry")
    demo = sub.add_parser("demo-eavesdrop", parents=[common], help="least-squares gain recovery demo")
    demo.add_argument("--samples", type=int)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = build_config(args)
        return COMMANDS[args.command](cfg, args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"encsec {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EncsecError, OSError) as exc:
        print(f"encsec {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
