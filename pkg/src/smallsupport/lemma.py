"""Small-support powers of high-order permutations.

Write the order of ``perm`` as ``N = q_1 ... q_r`` with ``q_i = p_i**b_i``
the prime-power parts. ``n(i)`` is the number of points lying on cycles
whose length is a multiple of the full ``q_i``. The power ``perm**(N/p_i)``
moves exactly those points, so choosing ``i`` with the least ``n(i)`` gives
a non-identity power of least possible support. If ``N >= n**alpha`` then
that least ``n(i)`` is at most ``n/alpha``.

Why the choice is optimal (``best_witness`` relies on this): the support of
``perm**m`` depends only on ``gcd(m, N)``, every proper divisor of ``N``
divides some ``N/p``, and supports shrink as the exponent gains divisors.
:func:`min_support_bruteforce` checks this directly by powering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDegree, HypothesisFails, OrderOne, ParseError
from .perm_core import FactoredInteger, Permutation, order_factored

__all__ = [
    "REPORT_KEYS",
    "WitnessReport",
    "best_witness",
    "hypothesis_holds",
    "max_alpha",
    "min_support_bruteforce",
    "parse_report",
    "prime_power_counts",
    "products_over_P",
    "weighted_average_W",
    "witness_power",
]

REPORT_KEYS = ("n", "order_factors", "alpha", "bound", "prime", "q", "m_factors", "support")

LOG_TOLERANCE = 1e-9


@dataclass(frozen=True)
class WitnessReport:
    n: int
    order: FactoredInteger
    chosen_prime: int
    chosen_prime_power: int
    exponent: FactoredInteger
    witness_support_size: int
    alpha: float
    bound: float
    all_counts: dict[int, int] = field(compare=False)

    def to_kv(self) -> str:
        values = (
            self.n,
            self.order,
            repr(self.alpha),
            repr(self.bound),
            self.chosen_prime,
            self.chosen_prime_power,
            self.exponent,
            self.witness_support_size,
        )
        return "".join(f"{k}={v}\n" for k, v in zip(REPORT_KEYS, values))


def parse_report(text: str) -> dict[str, str]:
    """Read back a ``to_kv`` block; the key set must match exactly."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ParseError(f"expected key=value, got {line!r}", line=lineno)
        out[key] = value
    if tuple(out) != REPORT_KEYS:
        raise ParseError(f"unexpected keys {sorted(out)}")
    return out


def _check_domain(perm: Permutation) -> FactoredInteger:
    if perm.n < 2:
        raise DegenerateDegree()
    order = order_factored(perm.cycles)
    if order.is_one():
        raise OrderOne()
    return order


def prime_power_counts(perm: Permutation, order: FactoredInteger | None = None) -> dict[int, tuple[int, int]]:
    """Map p_i -> (q_i, n(i)).

    Divisibility is by the full prime power q_i, not by p_i alone.
    """
    if order is None:
        order = order_factored(perm.cycles)
    lengths = perm.cycles.lengths
    out = {}
    for p, q in order.prime_powers().items():
        out[p] = (q, int(lengths[lengths % q == 0].sum()))
    return out


def products_over_P(perm: Permutation, order: FactoredInteger | None = None) -> list[int]:
    """For every point x, the product of those q_i dividing the length of x's cycle."""
    if order is None:
        order = order_factored(perm.cycles)
    qs = list(order.prime_powers().values())
    cs = perm.cycles
    per_length = {}
    for length in np.unique(cs.lengths).tolist():
        prod = 1
        for q in qs:
            if length % q == 0:
                prod *= q
        per_length[length] = prod
    per_cycle = [per_length[length] for length in cs.lengths.tolist()]
    return [per_cycle[c] for c in cs.point_to_cycle.tolist()]


def max_alpha(perm: Permutation) -> float:
    """log N / log n, the largest alpha with N >= n**alpha."""
    order = _check_domain(perm)
    return order.log() / math.log(perm.n)


def hypothesis_holds(order: FactoredInteger, n: int, alpha: float) -> bool:
    """Whether N >= n**alpha, compared in the log domain with a relative slack."""
    target = alpha * math.log(n)
    return order.log() >= target - LOG_TOLERANCE * max(1.0, target)


def witness_power(perm: Permutation, alpha: float) -> WitnessReport:
    order = _check_domain(perm)
    if not alpha > 0:
        raise HypothesisFails(f"alpha must be positive, got {alpha}")
    if not hypothesis_holds(order, perm.n, alpha):
        raise HypothesisFails(
            f"order {order} is below n^alpha = {perm.n}^{alpha} "
            f"(log N = {order.log():.6g} < {alpha * math.log(perm.n):.6g})"
        )
    counts = prime_power_counts(perm, order)
    # ties go to the smallest prime; dict iterates primes in ascending order
    p = min(counts, key=lambda prime: counts[prime][1])
    q, size = counts[p]
    return WitnessReport(
        n=perm.n,
        order=order,
        chosen_prime=p,
        chosen_prime_power=q,
        exponent=order.divide_by_prime(p),
        witness_support_size=size,
        alpha=alpha,
        bound=perm.n / alpha,
        all_counts={q_: c for q_, c in counts.values()},
    )


def best_witness(perm: Permutation) -> WitnessReport:
    return witness_power(perm, max_alpha(perm))


def _cycle_lengths(images: list[int]) -> set[int]:
    seen = bytearray(len(images))
    lengths = set()
    for s in range(len(images)):
        if seen[s]:
            continue
        length = 0
        x = s
        while not seen[x]:
            seen[x] = 1
            x = images[x]
            length += 1
        lengths.add(length)
    return lengths


def _prime_divisors(x: int) -> set[int]:
    out = set()
    d = 2
    while d * d <= x:
        if x % d == 0:
            out.add(d)
            while x % d == 0:
                x //= d
        d += 1
    if x > 1:
        out.add(x)
    return out


def _power_by_squaring(images: np.ndarray, m: int) -> np.ndarray:
    result = np.arange(len(images))
    base = images
    while m:
        if m & 1:
            result = base[result]
        base = base[base]
        m >>= 1
    return result


def min_support_bruteforce(perm: Permutation) -> tuple[int, int]:
    """Least support of perm**(N/p) over primes p | N, found by actually powering.

    Shares nothing with :func:`best_witness`: cycle lengths, the order and
    its primes are recomputed from scratch and powers are taken by repeated
    squaring of the image table. Returns ``(m, support size)`` with ``m``
    materialised; ties go to the smaller prime.
    """
    images = perm.images
    lengths = _cycle_lengths(images.tolist())
    order = math.lcm(*lengths)
    if order == 1:
        raise OrderOne()
    primes = set()
    for length in lengths:
        primes |= _prime_divisors(length)
    ident = np.arange(len(images))
    best = None
    for p in sorted(primes):
        m = order // p
        size = int(np.count_nonzero(_power_by_squaring(images, m) != ident))
        if best is None or size < best[1]:
            best = (m, size)
    return best


def weighted_average_W(perm: Permutation) -> float:
    """Average of the n(i) weighted by log q_i."""
    order = _check_domain(perm)
    counts = prime_power_counts(perm, order)
    num = math.fsum(c * math.log(q) for q, c in counts.values())
    den = math.fsum(math.log(q) for q, _ in counts.values())
    return num / den
