import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smallsupport.errors import DegenerateDegree, HypothesisFails, OrderOne
from smallsupport.lemma import (
    REPORT_KEYS,
    best_witness,
    max_alpha,
    min_support_bruteforce,
    parse_report,
    prime_power_counts,
    products_over_P,
    weighted_average_W,
    witness_power,
)
from smallsupport.perm_core import FactoredInteger, Permutation, degree, power


def cyc_perm(*lengths, n=None):
    cycles, start = [], 0
    for L in lengths:
        cycles.append(range(start, start + L))
        start += L
    return Permutation.from_cycles(n or start, cycles)


def all_powers_min_support(p):
    """Least support over every non-identity power, by naive iteration."""
    img = p.tolist()
    cur = list(range(p.n))
    best = None
    while True:
        cur = [img[x] for x in cur]
        if cur == list(range(p.n)):
            return best
        moved = sum(cur[x] != x for x in range(p.n))
        best = moved if best is None else min(best, moved)


@st.composite
def nonidentity_perms(draw, max_n=40):
    n = draw(st.integers(2, max_n))
    images = draw(st.permutations(range(n)))
    if images == list(range(n)):
        images = [1, 0] + list(range(2, n))
    return Permutation(images)


# -- max_alpha --------------------------------------------------------------


def test_max_alpha_examples():
    assert max_alpha(cyc_perm(12)) == pytest.approx(1.0, rel=1e-12)
    assert max_alpha(cyc_perm(2, 3, 5)) == pytest.approx(math.log(30) / math.log(10), rel=1e-12)
    assert max_alpha(cyc_perm(2, 3, 5)) == pytest.approx(1.4771212547196624, rel=1e-12)
    with pytest.raises(OrderOne):
        max_alpha(Permutation.identity(4))
    with pytest.raises(DegenerateDegree):
        max_alpha(Permutation.identity(1))


# -- witness_power -----------------------------------------------------------


def test_witness_two_three_five():
    r = witness_power(cyc_perm(2, 3, 5), 1.4)
    assert r.order.value() == 30
    assert r.all_counts == {2: 2, 3: 3, 5: 5}
    assert (r.chosen_prime, r.chosen_prime_power) == (2, 2)
    assert r.exponent.value() == 15
    assert r.witness_support_size == 2
    assert r.bound == pytest.approx(10 / 1.4)
    # brute force over all maximal divisors N/p
    assert min_support_bruteforce(cyc_perm(2, 3, 5)) == (15, 2)


def test_witness_equality_case_single_six_cycle():
    r = witness_power(cyc_perm(6), 1.0)
    assert r.all_counts == {2: 6, 3: 6}
    assert r.witness_support_size == 6 == r.bound
    assert r.chosen_prime == 2


def test_witness_trivial_regime():
    p = cyc_perm(2, n=100)
    r = witness_power(p, 0.1)
    assert r.order.value() == 2
    assert r.exponent.is_one()
    assert r.witness_support_size == 2
    assert r.bound == pytest.approx(1000)


def test_witness_hypothesis_checks():
    with pytest.raises(HypothesisFails):
        witness_power(cyc_perm(2, 3, 5), 1.5)
    with pytest.raises(HypothesisFails):
        witness_power(cyc_perm(2, 3, 5), 0.0)
    with pytest.raises(OrderOne):
        witness_power(Permutation.identity(5), 1.0)


def test_boundary_alpha_accepted_despite_rounding():
    # log(n**1)/log(n) need not be exactly 1.0 in floating point
    for n in (3, 7, 10, 12, 97, 1000):
        r = witness_power(cyc_perm(n), 1.0)
        assert r.witness_support_size == n
        r = witness_power(cyc_perm(n), max_alpha(cyc_perm(n)))
        assert r.witness_support_size == n


# -- best_witness -------------------------------------------------------------


def test_best_witness_examples():
    r = best_witness(cyc_perm(2, 3, 5))
    assert (r.chosen_prime, r.witness_support_size) == (2, 2)
    assert all_powers_min_support(cyc_perm(2, 3, 5)) == 2

    r = best_witness(cyc_perm(7))
    assert r.exponent.is_one() and r.witness_support_size == 7


def test_best_witness_uses_full_prime_power():
    p = cyc_perm(4, 6)
    r = best_witness(p)
    assert r.all_counts == {4: 4, 3: 6}
    assert (r.chosen_prime, r.chosen_prime_power) == (2, 4)
    assert r.exponent.value() == 6
    assert r.witness_support_size == 4
    assert degree(power(p, 6)) == 4
    assert all_powers_min_support(p) == 4
    # counting by the bare prime would claim 10 points for p=2
    lengths = p.cycles.lengths
    assert int(lengths[lengths % 2 == 0].sum()) == 10


def test_min_support_bruteforce_examples():
    assert min_support_bruteforce(cyc_perm(4)) == (2, 4)
    with pytest.raises(OrderOne):
        min_support_bruteforce(Permutation.identity(3))


@settings(max_examples=200)
@given(nonidentity_perms(max_n=12))
def test_best_witness_is_global_minimum(p):
    assert best_witness(p).witness_support_size == all_powers_min_support(p)


@settings(max_examples=200)
@given(nonidentity_perms())
def test_witness_properties(p):
    r = best_witness(p)
    alpha = max_alpha(p)
    assert r.witness_support_size <= p.n / alpha + 1e-9 * p.n
    w = power(p, r.exponent)
    assert not w.is_identity()
    assert degree(w) == r.witness_support_size
    assert min_support_bruteforce(p)[1] == r.witness_support_size
    # m differs from N only in the chosen prime's exponent
    diff = {q: r.order.exponent(q) - r.exponent.exponent(q) for q in r.order.primes}
    assert diff == {q: int(q == r.chosen_prime) for q in r.order.primes}


@given(nonidentity_perms())
def test_counts_agree_with_per_point_membership(p):
    cs = p.cycles
    for prime, (q, count) in prime_power_counts(p).items():
        assert count == sum(1 for x in range(p.n) if cs.length_through(x) % q == 0)


@given(nonidentity_perms())
def test_products_over_P_divide_cycle_length(p):
    prods = products_over_P(p)
    for x in range(p.n):
        assert p.cycles.length_through(x) % prods[x] == 0
        assert prods[x] <= p.n


# -- weighted average ------------------------------------------------------------


def test_weighted_average_examples():
    expected = (2 * math.log(2) + 3 * math.log(3) + 5 * math.log(5)) / math.log(30)
    assert weighted_average_W(cyc_perm(2, 3, 5)) == pytest.approx(expected, rel=1e-12)
    assert weighted_average_W(cyc_perm(2, 3, 5)) == pytest.approx(3.7426, abs=1e-4)
    assert weighted_average_W(cyc_perm(30)) == pytest.approx(30, rel=1e-12)


@given(nonidentity_perms(max_n=80))
def test_weighted_average_chain(p):
    counts = [c for _, c in prime_power_counts(p).values()]
    W = weighted_average_W(p)
    upper = p.n / max_alpha(p)
    assert min(counts) <= W * (1 + 1e-9)
    assert W <= upper * (1 + 1e-9)


# -- serialisation ------------------------------------------------------------------


def test_report_kv_golden():
    text = best_witness(cyc_perm(2, 3, 5)).to_kv()
    assert text == (
        "n=10\n"
        "order_factors=2 3 5\n"
        "alpha=1.4771212547196624\n"
        "bound=6.769924925288455\n"
        "prime=2\n"
        "q=2\n"
        "m_factors=3 5\n"
        "support=2\n"
    )
    parsed = parse_report(text)
    assert tuple(parsed) == REPORT_KEYS
    assert FactoredInteger.parse(parsed["m_factors"]).value() == 15


def test_random_large_witness_is_valid():
    rng = np.random.default_rng(11)
    p = Permutation.random(50_000, rng)
    r = best_witness(p)
    assert degree(power(p, r.exponent)) == r.witness_support_size
    assert r.witness_support_size <= r.bound
