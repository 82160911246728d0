"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 hypothesis or limit error,
3 property violation.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import designs, lemma, quasigroup
from .errors import HypothesisError, InputError, PropertyViolation, TooLarge
from .perm_core import Permutation, degree, order_factored, power, read_permutation

EXIT_OK, EXIT_INPUT, EXIT_HYPOTHESIS, EXIT_VIOLATION = 0, 1, 2, 3


def _emit(out, fmt: str, pairs):
    """Print (key, value) pairs as key=value lines or an aligned text block."""
    if fmt == "kv":
        for k, v in pairs:
            out.write(f"{k}={v}\n")
    else:
        width = max((len(k) for k, _ in pairs), default=0)
        for k, v in pairs:
            out.write(f"{k.replace('_', ' '):<{width}}  {v}\n")


def _cycle_type_str(perm: Permutation) -> str:
    return " ".join(
        str(length) if count == 1 else f"{length}^{count}"
        for length, count in perm.cycles.cycle_type().items()
    )


# -- analyze-perm ---------------------------------------------------------------


def cmd_analyze_perm(args, out) -> int:
    perm = read_permutation(args.path)
    if args.alpha is not None:
        report = lemma.witness_power(perm, args.alpha)
    else:
        report = lemma.best_witness(perm)
    pairs = [
        ("cycle_type", _cycle_type_str(perm)),
        ("max_alpha", repr(lemma.max_alpha(perm))),
        ("weighted_average", repr(lemma.weighted_average_W(perm))),
    ]
    pairs += [tuple(line.split("=", 1)) for line in report.to_kv().splitlines()]
    _emit(out, args.format, pairs)
    if report.witness_support_size > report.bound * (1 + 1e-9):
        raise PropertyViolation(f"witness support {report.witness_support_size} exceeds n/alpha = {report.bound}")
    return EXIT_OK


# -- verify-lemma --------------------------------------------------------------------


@dataclass
class TrialSummary:
    checked: int = 0
    identity_skipped: int = 0
    violations: int = 0
    max_ratio: float = 0.0
    first_violation: int = -1

    def merge(self, other: TrialSummary) -> TrialSummary:
        firsts = [t for t in (self.first_violation, other.first_violation) if t >= 0]
        return TrialSummary(
            self.checked + other.checked,
            self.identity_skipped + other.identity_skipped,
            self.violations + other.violations,
            max(self.max_ratio, other.max_ratio),
            min(firsts) if firsts else -1,
        )


def trial_permutation(n: int, seed: int, trial: int) -> Permutation:
    """The permutation drawn for one trial; depends only on (seed, trial)."""
    rng = np.random.default_rng([seed, trial])
    return Permutation(rng.permutation(n), check=False)


def run_trials(n: int, seed: int, start: int, stop: int) -> TrialSummary:
    s = TrialSummary()
    for t in range(start, stop):
        perm = trial_permutation(n, seed, t)
        if order_factored(perm).is_one():
            s.identity_skipped += 1
            continue
        s.checked += 1
        report = lemma.best_witness(perm)
        ratio = report.witness_support_size * report.alpha / n
        s.max_ratio = max(s.max_ratio, ratio)
        ok = (
            ratio <= 1 + 1e-9
            and lemma.min_support_bruteforce(perm)[1] == report.witness_support_size
            and degree(power(perm, report.exponent)) == report.witness_support_size
        )
        if not ok:
            s.violations += 1
            if s.first_violation < 0:
                s.first_violation = t
    return s


def verify_lemma(n: int, trials: int, seed: int, workers: int = 1) -> TrialSummary:
    if n < 2:
        raise HypothesisError(f"n must be at least 2, got {n}")
    if trials < 1:
        raise InputError(f"trials must be at least 1, got {trials}")
    chunks = max(1, min(workers, trials))
    bounds = [trials * i // chunks for i in range(chunks + 1)]
    if chunks == 1:
        return run_trials(n, seed, 0, trials)
    with ProcessPoolExecutor(max_workers=chunks) as pool:
        parts = pool.map(run_trials, [n] * chunks, [seed] * chunks, bounds[:-1], bounds[1:])
        total = TrialSummary()
        for part in parts:
            total = total.merge(part)
    return total


def cmd_verify_lemma(args, out) -> int:
    s = verify_lemma(args.n, args.trials, args.seed, args.workers)
    pairs = [
        ("n", args.n),
        ("trials", args.trials),
        ("seed", args.seed),
        ("checked", s.checked),
        ("identity_skipped", s.identity_skipped),
        ("violations", s.violations),
        ("max_ratio", repr(s.max_ratio)),
        ("result", "pass" if s.violations == 0 else "FAIL"),
    ]
    _emit(out, args.format, pairs)
    if s.violations:
        raise PropertyViolation(f"{s.violations} trial(s) violated the bound, first at trial {s.first_violation}")
    return EXIT_OK


# -- latin ------------------------------------------------------------------------------


def _check_limit(n: int):
    limit = quasigroup.enumeration_limit()
    if n > limit:
        raise TooLarge(f"order {n} exceeds the enumeration limit {limit} (SMALLSUPPORT_LIMIT_N)")


def cmd_latin(args, out) -> int:
    L = quasigroup.read_latin(args.path)
    if args.action == "validate":
        _emit(out, args.format, [("n", L.n), ("valid", "true")])
        return EXIT_OK
    if args.action == "autos":
        autos = quasigroup.automorphisms(L)
        pairs = [("n", L.n), ("automorphisms", len(autos))]
        for i, pi in enumerate(autos):
            pairs.append((f"automorphism.{i}", " ".join(map(str, pi.tolist()))))
            pairs.append((f"order.{i}", order_factored(pi).value()))
        _emit(out, args.format, pairs)
        return EXIT_OK
    _check_limit(L.n)
    if args.action == "autotopisms":
        atps = quasigroup.autotopisms(L)
        top = max(th.order().value() for th in atps)
        _emit(out, args.format, [("n", L.n), ("autotopisms", len(atps)), ("max_autotopism_order", top)])
        return EXIT_OK
    # bounds
    t1 = quasigroup.check_theorem1_bound(L)
    t2 = quasigroup.check_autotopism_bounds(L)
    pairs = [("theorem1." + k, v) for k, v in _kv_pairs(t1.to_kv())]
    pairs += [("autotopism." + k, v) for k, v in _kv_pairs(t2.to_kv())]
    pairs.append(("result", "pass" if t1.ok and t2.ok else "FAIL"))
    _emit(out, args.format, pairs)
    if not (t1.ok and t2.ok):
        raise PropertyViolation(f"{len(t1.violations) + len(t2.violations)} bound violation(s)")
    return EXIT_OK


def _kv_pairs(text: str):
    return [tuple(line.split("=", 1)) for line in text.splitlines()]


# -- fmax -------------------------------------------------------------------------------------


def cmd_fmax(args, out) -> int:
    rows = quasigroup.f_max_table(args.n_max)
    if args.format == "kv":
        for r in rows:
            out.write(f"n={r.n} f={r.f} bound_n2_over_4={r.quarter_bound!r}\n")
    else:
        out.write(f"{'n':>3} {'f(n)':>6} {'n^2/4':>8}\n")
        for r in rows:
            out.write(f"{r.n:>3} {r.f:>6} {r.quarter_bound:>8g}\n")
    return EXIT_OK


# -- designs ----------------------------------------------------------------------------------


def cmd_design(args, out) -> int:
    D = designs.read_design(args.path)
    if args.action == "validate":
        _emit(out, args.format, [("n", D.n), ("k", D.k), ("lines", len(D.lines)), ("valid", "true")])
        return EXIT_OK
    autos = designs.design_automorphisms(D)
    if args.action == "autos":
        pairs = [("n", D.n), ("automorphisms", len(autos))]
        for i, pi in enumerate(autos):
            pairs.append((f"automorphism.{i}", " ".join(map(str, pi.tolist()))))
            pairs.append((f"order.{i}", order_factored(pi).value()))
        _emit(out, args.format, pairs)
        return EXIT_OK
    report = designs.check_proposition_a(D, autos)
    _emit(out, args.format, _kv_pairs(report.to_kv()))
    if not report.ok:
        raise PropertyViolation(f"max automorphism order {report.max_order.value()} >= n^2 = {report.bound}")
    return EXIT_OK


def cmd_sts_convert(args, out) -> int:
    D = designs.read_design(args.path)
    L = quasigroup.sts_to_quasigroup(D)
    text = quasigroup.format_latin(L)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_OK


# -- entry point ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "kv"), default="text")

    parser = argparse.ArgumentParser(
        prog="smallsupport",
        description="Small-support powers of permutations and order bounds for quasigroups and designs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze-perm", parents=[common], help="cycle type, order and witness power")
    p.add_argument("path")
    p.add_argument("--alpha", type=float, default=None, help="use this alpha instead of the largest valid one")
    p.set_defaults(func=cmd_analyze_perm)

    p = sub.add_parser("verify-lemma", parents=[common], help="random-permutation campaign")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1, help="processes; output does not depend on it")
    p.set_defaults(func=cmd_verify_lemma)

    p = sub.add_parser("latin", parents=[common], help="Latin square analysis")
    p.add_argument("path")
    p.add_argument("action", choices=("validate", "autos", "autotopisms", "bounds"))
    p.set_defaults(func=cmd_latin)

    p = sub.add_parser("fmax", parents=[common], help="f(n) by exhaustive search")
    p.add_argument("--n-max", type=int, required=True)
    p.set_defaults(func=cmd_fmax)

    p = sub.add_parser("design", parents=[common], help="Steiner 2-design analysis")
    p.add_argument("path")
    p.add_argument("action", choices=("validate", "autos", "bound"))
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("sts-convert", parents=[common], help="Steiner triple system to Latin square")
    p.add_argument("path")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_sts_convert)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except PropertyViolation as exc:
        err.write(f"property violation: {exc}\n")
        return EXIT_VIOLATION
    except HypothesisError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_HYPOTHESIS
    except (InputError, OSError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
