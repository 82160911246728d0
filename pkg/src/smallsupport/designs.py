"""Steiner 2-designs: validation, automorphism search and order bounds."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from itertools import combinations

from .errors import BadLineSize, PairCovered, ParseError
from .lemma import WitnessReport, best_witness
from .perm_core import FactoredInteger, Permutation, order_factored

__all__ = [
    "DesignReport",
    "SteinerDesign",
    "affine_plane_3",
    "check_proposition_a",
    "cyclic_sts13",
    "design_automorphisms",
    "fano_plane",
    "format_design",
    "parse_design",
    "read_design",
    "sts15",
    "validate_design",
]


@dataclass(frozen=True)
class SteinerDesign:
    """A 2-(n, k, 1) design; lines are sorted tuples in sorted order."""

    n: int
    k: int
    lines: tuple[tuple[int, ...], ...]

    @cached_property
    def line_index(self) -> dict[tuple[int, int], int]:
        """Map each pair ``(x, y)``, x < y, to the index of its line."""
        out = {}
        for i, line in enumerate(self.lines):
            for pair in combinations(line, 2):
                out[pair] = i
        return out

    def line_through(self, x: int, y: int) -> int:
        return self.line_index[(x, y) if x < y else (y, x)]

    @cached_property
    def line_set(self) -> frozenset[tuple[int, ...]]:
        return frozenset(self.lines)

    def preserves(self, perm: Permutation) -> bool:
        img = perm.tolist()
        return all(tuple(sorted(img[x] for x in line)) in self.line_set for line in self.lines)


def validate_design(n: int, k: int, lines) -> SteinerDesign:
    if k < 3:
        raise BadLineSize(-1, f"line size k={k}; Steiner 2-designs here need k >= 3")
    if n < k:
        raise BadLineSize(-1, f"{n} points cannot carry a line of {k} points")
    canon = []
    for i, line in enumerate(lines):
        pts = tuple(sorted(int(x) for x in line))
        if len(pts) != k or len(set(pts)) != k:
            raise BadLineSize(i, f"line {i} has {len(set(pts))} distinct points, expected {k}")
        if pts[0] < 0 or pts[-1] >= n:
            raise BadLineSize(i, f"line {i} has a point outside 0..{n - 1}")
        canon.append(pts)
    seen = set()
    for pts in canon:
        for pair in combinations(pts, 2):
            if pair in seen:
                raise PairCovered(pair, "twice")
            seen.add(pair)
    for pair in combinations(range(n), 2):
        if pair not in seen:
            raise PairCovered(pair, "never")
    assert len(canon) == expected_line_count(n, k)
    return SteinerDesign(n, k, tuple(sorted(canon)))


def design_automorphisms(design: SteinerDesign) -> list[Permutation]:
    """All point permutations mapping lines onto lines, in lexicographic order.

    Points are assigned in increasing order. Once two points of a line have
    images, the line's image is known and every other point of the line
    must land on it; for triple systems this forces the image outright.
    """
    n = design.n
    lines = design.lines
    through = design.line_index
    lines_of = [[] for _ in range(n)]
    for i, line in enumerate(lines):
        for x in line:
            lines_of[x].append(i)

    image = [-1] * n
    used = [False] * n
    line_image = [-1] * len(lines)
    line_used = [False] * len(lines)
    out = []

    def pair_line(a, b):
        return through[(a, b) if a < b else (b, a)]

    def assign(x, y, trail):
        # returns False on conflict; trail records undo actions
        image[x] = y
        used[y] = True
        trail.append(("pt", x))
        for z in range(n):
            if z == x or image[z] < 0:
                continue
            src = pair_line(x, z)
            dst = pair_line(y, image[z])
            if line_image[src] < 0:
                if line_used[dst]:
                    return False
                line_image[src] = dst
                line_used[dst] = True
                trail.append(("ln", src))
            elif line_image[src] != dst:
                return False
        return True

    def undo(trail):
        for kind, v in reversed(trail):
            if kind == "pt":
                used[image[v]] = False
                image[v] = -1
            else:
                line_used[line_image[v]] = False
                line_image[v] = -1

    def candidates(x):
        allowed = None
        for li in lines_of[x]:
            if line_image[li] >= 0:
                pts = set(lines[line_image[li]])
                allowed = pts if allowed is None else allowed & pts
        pool = range(n) if allowed is None else sorted(allowed)
        return [y for y in pool if not used[y]]

    def search(x):
        if x == n:
            out.append(Permutation(image, check=False))
            return
        for y in candidates(x):
            trail = []
            if assign(x, y, trail):
                search(x + 1)
            undo(trail)

    search(0)
    return out


@dataclass(frozen=True)
class DesignReport:
    n: int
    k: int
    automorphism_count: int
    max_order: FactoredInteger
    max_order_element: Permutation
    witness: WitnessReport | None
    order_growth_reference: float

    @property
    def bound(self) -> int:
        return self.n * self.n

    @property
    def ok(self) -> bool:
        return self.max_order.value() < self.bound

    def to_kv(self) -> str:
        rows = [
            ("n", self.n),
            ("k", self.k),
            ("automorphisms", self.automorphism_count),
            ("max_order", self.max_order.value()),
            ("max_order_factors", self.max_order),
            ("bound_n2", self.bound),
            ("proposition_a", "pass" if self.ok else "FAIL"),
            ("reference_n_pow_1_plus_1_over_k_minus_2", repr(self.order_growth_reference)),
        ]
        if self.witness is not None:
            rows += [
                ("witness_prime", self.witness.chosen_prime),
                ("witness_m_factors", self.witness.exponent),
                ("witness_support", self.witness.witness_support_size),
            ]
        return "".join(f"{k}={v}\n" for k, v in rows)


def check_proposition_a(design: SteinerDesign, automorphisms: list[Permutation] | None = None) -> DesignReport:
    """Max automorphism order against n**2, plus the small-support witness.

    ``order_growth_reference`` is n**(1 + 1/(k-2)) and carries no verdict:
    the asymptotic bound it belongs to has an unstated constant.
    """
    if automorphisms is None:
        automorphisms = design_automorphisms(design)
    # first element of largest order in lexicographic order
    best, order = automorphisms[0], order_factored(automorphisms[0])
    for g in automorphisms[1:]:
        o = order_factored(g)
        if o.value() > order.value():
            best, order = g, o
    witness = None if order.is_one() else best_witness(best)
    return DesignReport(
        n=design.n,
        k=design.k,
        automorphism_count=len(automorphisms),
        max_order=order,
        max_order_element=best,
        witness=witness,
        order_growth_reference=design.n ** (1 + 1 / (design.k - 2)),
    )


# -- bundled designs ------------------------------------------------------------


def fano_plane() -> SteinerDesign:
    return validate_design(7, 3, [(i, (i + 1) % 7, (i + 3) % 7) for i in range(7)])


def affine_plane_3() -> SteinerDesign:
    """AG(2,3): points (x, y) of Z_3^2 numbered 3x + y."""
    pts = [(x, y) for x in range(3) for y in range(3)]
    lines = set()
    for a, b in combinations(pts, 2):
        dx, dy = (b[0] - a[0]) % 3, (b[1] - a[1]) % 3
        line = tuple(sorted(3 * ((a[0] + t * dx) % 3) + (a[1] + t * dy) % 3 for t in range(3)))
        lines.add(line)
    return validate_design(9, 3, lines)


def cyclic_sts13() -> SteinerDesign:
    """Develop the difference family {0,1,4}, {0,2,7} modulo 13."""
    base = [(0, 1, 4), (0, 2, 7)]
    return validate_design(13, 3, [tuple((x + s) % 13 for x in b) for b in base for s in range(13)])


def sts15() -> SteinerDesign:
    """The projective STS(15), read from the packaged design file."""
    text = resources.files("smallsupport").joinpath("data/sts15.txt").read_text()
    return parse_design(text)


# -- text format ---------------------------------------------------------------------


def parse_design(text: str) -> SteinerDesign:
    """First line ``n k``; then one line of k points per block."""
    rows = [(i, ln.split()) for i, ln in enumerate(text.splitlines(), 1) if ln.strip()]
    if not rows:
        raise ParseError("empty design file", line=1)
    lineno, head = rows[0]
    try:
        n, k = (int(t) for t in head)
    except ValueError:
        raise ParseError(f"expected 'n k', got {' '.join(head)!r}", line=lineno) from None
    blocks = []
    for lineno, toks in rows[1:]:
        try:
            blocks.append([int(t) for t in toks])
        except ValueError:
            raise ParseError(f"non-integer point in {' '.join(toks)!r}", line=lineno) from None
    return validate_design(n, k, blocks)


def format_design(design: SteinerDesign) -> str:
    body = "".join(" ".join(map(str, line)) + "\n" for line in design.lines)
    return f"{design.n} {design.k}\n{body}"


def read_design(path) -> SteinerDesign:
    with open(path) as fh:
        return parse_design(fh.read())


def expected_line_count(n: int, k: int) -> int:
    return n * (n - 1) // (k * (k - 1))

