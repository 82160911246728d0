import itertools

import pytest

from smallsupport.designs import (
    affine_plane_3,
    check_proposition_a,
    cyclic_sts13,
    design_automorphisms,
    expected_line_count,
    fano_plane,
    format_design,
    parse_design,
    read_design,
    sts15,
    validate_design,
)
from smallsupport.errors import BadLineSize, PairCovered, ParseError
from smallsupport.lemma import best_witness
from smallsupport.perm_core import Permutation, degree, order_factored, power
from smallsupport.quasigroup import automorphisms, sts_to_quasigroup


def pg23():
    """Projective plane of order 3 from the difference set {0,1,3,9} mod 13."""
    return validate_design(13, 4, [tuple((x + s) % 13 for x in (0, 1, 3, 9)) for s in range(13)])


# -- validation ---------------------------------------------------------------


def test_fano_lines_canonical():
    D = fano_plane()
    assert D.lines == ((0, 1, 3), (0, 2, 6), (0, 4, 5), (1, 2, 4), (1, 5, 6), (2, 3, 5), (3, 4, 6))
    assert len(D.lines) == expected_line_count(7, 3) == 7


def test_pair_covered_twice():
    lines = list(fano_plane().lines)
    lines[-1] = (0, 1, 2)
    with pytest.raises(PairCovered) as exc:
        validate_design(7, 3, lines)
    assert exc.value.how == "twice"


def test_pair_covered_never():
    with pytest.raises(PairCovered) as exc:
        validate_design(7, 3, fano_plane().lines[:-1])
    assert exc.value.how == "never"
    assert exc.value.pair in {(3, 4), (3, 6), (4, 6)}


@pytest.mark.parametrize(
    "n, k, lines, index",
    [
        (7, 2, [(0, 1)], -1),
        (2, 3, [], -1),
        (7, 3, [(0, 1)], 0),
        (7, 3, [(0, 1, 1)], 0),
        (7, 3, [(0, 1, 3), (0, 2, 7)], 1),
        (7, 3, [(0, 1, 3), (-1, 2, 4)], 1),
    ],
)
def test_bad_line_size(n, k, lines, index):
    with pytest.raises(BadLineSize) as exc:
        validate_design(n, k, lines)
    assert exc.value.index == index


def test_single_line_design():
    D = validate_design(3, 3, [(2, 0, 1)])
    assert D.lines == ((0, 1, 2),)


def _covers_every_pair_once(n, lines):
    pairs = [p for line in lines for p in itertools.combinations(sorted(line), 2)]
    return len(pairs) == len(set(pairs)) and set(pairs) == set(itertools.combinations(range(n), 2))


def _count_and_no_repeat(n, k, lines):
    pairs = [p for line in lines for p in itertools.combinations(sorted(line), 2)]
    return len(lines) == expected_line_count(n, k) and len(pairs) == len(set(pairs))


@pytest.mark.parametrize("drop", range(7))
def test_pair_coverage_equivalence_on_perturbations(drop):
    # each perturbation breaks both conditions or neither
    base = list(fano_plane().lines)
    candidates = [
        base,
        base[:drop] + base[drop + 1 :],
        base + [base[drop]],
        base[:drop] + [tuple(sorted((base[drop][0], base[drop][1], (base[drop][2] + 1) % 7)))] + base[drop + 1 :],
    ]
    for lines in candidates:
        assert _covers_every_pair_once(7, lines) == _count_and_no_repeat(7, 3, lines)


def test_pair_coverage_equivalence_exhaustive_on_six_points():
    # 5-line families of triples on 6 points: none is a design, and the checks agree
    triples = list(itertools.combinations(range(6), 3))
    for lines in itertools.combinations(triples, 5):
        assert _covers_every_pair_once(6, lines) == _count_and_no_repeat(6, 3, lines)


# -- automorphism search -------------------------------------------------------------


def test_fano_automorphisms_match_brute_force():
    D = fano_plane()
    brute = [Permutation(p) for p in itertools.permutations(range(7)) if D.preserves(Permutation(p))]
    found = design_automorphisms(D)
    assert len(found) == 168
    assert found == brute


def test_single_line_design_has_full_symmetric_group():
    D = validate_design(3, 3, [(0, 1, 2)])
    assert design_automorphisms(D) == [Permutation(p) for p in itertools.permutations(range(3))]


@pytest.mark.parametrize("make", [fano_plane, affine_plane_3])
def test_automorphisms_form_a_group(make):
    autos = design_automorphisms(make())
    group = set(autos)
    assert Permutation.identity(make().n) in group
    for g in autos[::7]:
        assert g.inverse() in group
        for h in autos[::5]:
            assert g * h in group


@pytest.mark.parametrize(
    "make, count, top",
    [
        (fano_plane, 168, 7),
        (affine_plane_3, 432, 8),
        (cyclic_sts13, 39, 13),
        (pg23, 5616, 13),
    ],
)
def test_group_orders(make, count, top):
    D = make()
    autos = design_automorphisms(D)
    assert len(autos) == count
    assert all(D.preserves(g) for g in autos)
    assert max(order_factored(g).value() for g in autos) == top


@pytest.mark.slow
def test_sts15_group_order():
    autos = design_automorphisms(sts15())
    assert len(autos) == 20160
    assert max(order_factored(g).value() for g in autos) == 15


def test_sts15_file_is_valid():
    D = sts15()
    assert (D.n, D.k, len(D.lines)) == (15, 3, 35)


def test_cyclic_shift_preserves_sts13():
    D = cyclic_sts13()
    shift = Permutation([(x + 1) % 13 for x in range(13)])
    assert D.preserves(shift)
    assert order_factored(shift).value() == 13
    assert shift in set(design_automorphisms(D))


# -- order bound and witness ---------------------------------------------------------


@pytest.mark.parametrize(
    "make, top",
    [(fano_plane, 7), (affine_plane_3, 8), (cyclic_sts13, 13), (pg23, 13)],
)
def test_proposition_a_reports(make, top):
    D = make()
    r = check_proposition_a(D)
    assert r.ok
    assert r.max_order.value() == top < D.n**2
    assert order_factored(r.max_order_element) == r.max_order
    assert r.witness is not None and r.witness.witness_support_size >= 2
    kv = dict(line.split("=", 1) for line in r.to_kv().splitlines())
    assert kv["proposition_a"] == "pass"
    assert kv["bound_n2"] == str(D.n**2)
    assert float(kv["reference_n_pow_1_plus_1_over_k_minus_2"]) == pytest.approx(D.n ** (1 + 1 / (D.k - 2)))


def test_fano_report_golden():
    r = check_proposition_a(fano_plane())
    assert r.to_kv() == (
        "n=7\nk=3\nautomorphisms=168\nmax_order=7\nmax_order_factors=7\nbound_n2=49\n"
        "proposition_a=pass\nreference_n_pow_1_plus_1_over_k_minus_2=49.0\n"
        "witness_prime=7\nwitness_m_factors=1\nwitness_support=7\n"
    )


def test_trivial_group_has_no_witness():
    D = fano_plane()
    r = check_proposition_a(D, [Permutation.identity(7)])
    assert r.witness is None and r.max_order.value() == 1 and r.ok


@pytest.mark.parametrize("make", [fano_plane, affine_plane_3, cyclic_sts13])
def test_every_nonidentity_automorphism_has_a_witness(make):
    D = make()
    for g in design_automorphisms(D):
        if g.is_identity():
            continue
        w = best_witness(g)
        h = power(g, w.exponent)
        assert not h.is_identity()
        assert degree(h) == w.witness_support_size <= D.n / w.alpha * (1 + 1e-9)
        assert D.preserves(h)


# -- triple systems as quasigroups ------------------------------------------------------


@pytest.mark.parametrize("make", [fano_plane, affine_plane_3])
def test_sts_round_trip_automorphisms(make):
    D = make()
    L = sts_to_quasigroup(D)
    assert L.is_commutative() and L.is_idempotent()
    assert set(design_automorphisms(D)) == set(automorphisms(L))


# -- file format ----------------------------------------------------------------------------


@pytest.mark.parametrize("make", [fano_plane, affine_plane_3, cyclic_sts13, pg23])
def test_file_round_trip(make, tmp_path):
    D = make()
    path = tmp_path / "d.txt"
    path.write_text(format_design(D))
    assert read_design(path) == D


def test_parse_design_unsorted_input():
    text = "7 3\n3 1 0\n\n6 2 0\n5 4 0\n4 2 1\n6 5 1\n5 3 2\n6 4 3\n"
    assert parse_design(text) == fano_plane()


@pytest.mark.parametrize(
    "text, line",
    [("", 1), ("7\n", 1), ("7 3\n0 1 x\n", 2), ("seven 3\n", 1)],
)
def test_parse_design_errors(text, line):
    with pytest.raises(ParseError) as exc:
        parse_design(text)
    assert exc.value.line == line
