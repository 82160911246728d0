"""Quasigroups as Latin squares: automorphisms, autotopisms and order bounds.

Symbols, rows and columns are all ``0..n-1`` and ``table[g][h]`` is the
product ``gh``. Permutations act on the left here: ``pi(g) = pi.images[g]``.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import InitVar, dataclass, field
from functools import cached_property

import numpy as np

from .designs import SteinerDesign, validate_design
from .errors import (
    BadLineSize,
    ClosureViolation,
    IdentityInput,
    InputError,
    NotAutomorphism,
    NotAutotopism,
    NotLatin,
    NotSTS,
    PairCovered,
    ParseError,
    SizeMismatch,
    TooLarge,
)
from .lemma import best_witness
from .perm_core import FactoredInteger, Permutation, format_permutation, order_factored, parse_permutation

__all__ = [
    "Autotopism",
    "AutotopismReport",
    "LatinSquare",
    "Theorem1Report",
    "automorphisms",
    "autotopisms",
    "check_autotopism_bounds",
    "check_theorem1_bound",
    "enumeration_limit",
    "f_max",
    "f_max_table",
    "fixed_point_subquasigroup",
    "format_autotopism",
    "format_latin",
    "is_automorphism",
    "is_autotopism",
    "latin_squares",
    "parse_autotopism",
    "parse_latin",
    "read_latin",
    "square_with_automorphism",
    "sts_to_quasigroup",
    "validate",
]

DEFAULT_LIMIT_N = 6


def enumeration_limit() -> int:
    """Largest order for exhaustive work; ``SMALLSUPPORT_LIMIT_N`` overrides."""
    raw = os.environ.get("SMALLSUPPORT_LIMIT_N")
    if raw is None:
        return DEFAULT_LIMIT_N
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"SMALLSUPPORT_LIMIT_N must be an integer, got {raw!r}") from None


@dataclass(frozen=True)
class LatinSquare:
    n: int
    table: tuple[tuple[int, ...], ...]

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.array(self.table, dtype=np.int64).reshape(self.n, self.n)
        arr.setflags(write=False)
        return arr

    def __call__(self, g: int, h: int) -> int:
        return self.table[g][h]

    def left_divide(self, a: int, b: int) -> int:
        """The unique x with ax = b."""
        return self.table[a].index(b)

    def right_divide(self, a: int, b: int) -> int:
        """The unique y with ya = b."""
        return next(y for y in range(self.n) if self.table[y][a] == b)

    def relabel(self, sigma: Permutation) -> LatinSquare:
        """The isomorphic square in which g*h = k becomes sigma(g)*sigma(h) = sigma(k)."""
        s = sigma.images
        new = np.empty((self.n, self.n), dtype=np.int64)
        new[np.ix_(s, s)] = s[self.array]
        return LatinSquare(self.n, tuple(map(tuple, new.tolist())))

    def is_commutative(self) -> bool:
        return bool(np.array_equal(self.array, self.array.T))

    def is_idempotent(self) -> bool:
        return all(self.table[x][x] == x for x in range(self.n))


def validate(raw) -> LatinSquare:
    rows = [list(map(int, r)) for r in raw]
    n = len(rows)
    if n == 0:
        raise InputError("empty table")
    for i, r in enumerate(rows):
        if len(r) != n:
            raise InputError(f"row {i} has {len(r)} entries, expected {n}")
        for j, v in enumerate(r):
            if not 0 <= v < n:
                raise InputError(f"entry ({i}, {j}) = {v} is outside 0..{n - 1}")
    for i, r in enumerate(rows):
        rep = _first_repeat(r)
        if rep is not None:
            raise NotLatin("row", i, rep[0], [(i, rep[1]), (i, rep[2])])
    for j in range(n):
        rep = _first_repeat([rows[i][j] for i in range(n)])
        if rep is not None:
            raise NotLatin("column", j, rep[0], [(rep[1], j), (rep[2], j)])
    return LatinSquare(n, tuple(map(tuple, rows)))


def _first_repeat(values):
    """(value, first position, second position) of the first repeat, or None."""
    seen = {}
    for i, v in enumerate(values):
        if v in seen:
            return v, seen[v], i
        seen[v] = i
    return None


def _check_size(L: LatinSquare, *perms: Permutation):
    for p in perms:
        if p.n != L.n:
            raise SizeMismatch(f"permutation on {p.n} points, square of order {L.n}")


def is_automorphism(L: LatinSquare, pi: Permutation) -> bool:
    _check_size(L, pi)
    p = pi.images
    return bool(np.array_equal(L.array[np.ix_(p, p)], p[L.array]))


def is_autotopism(L: LatinSquare, alpha: Permutation, beta: Permutation, gamma: Permutation) -> bool:
    _check_size(L, alpha, beta, gamma)
    return bool(np.array_equal(L.array[np.ix_(alpha.images, beta.images)], gamma.images[L.array]))


@dataclass(frozen=True)
class Autotopism:
    """A triple with alpha(g) beta(h) = gamma(gh); checked when ``square`` is given."""

    alpha: Permutation
    beta: Permutation
    gamma: Permutation
    square: InitVar[LatinSquare | None] = None

    def __post_init__(self, square):
        if square is not None and not is_autotopism(square, self.alpha, self.beta, self.gamma):
            raise NotAutotopism("triple does not satisfy alpha(g)beta(h) = gamma(gh)")

    @property
    def n(self) -> int:
        return self.alpha.n

    def order(self) -> FactoredInteger:
        return order_factored(self.alpha).lcm(order_factored(self.beta), order_factored(self.gamma))

    def is_identity(self) -> bool:
        return self.alpha.is_identity() and self.beta.is_identity() and self.gamma.is_identity()

    def fixed_counts(self) -> tuple[int, int, int]:
        idx = np.arange(self.n)
        return tuple(int(np.count_nonzero(p.images == idx)) for p in (self.alpha, self.beta, self.gamma))

    def on_union(self, parts: int = 2) -> Permutation:
        """The action on the disjoint union of ``parts`` copies of the point set."""
        n = self.n
        comps = (self.alpha, self.beta, self.gamma)[:parts]
        return Permutation(np.concatenate([p.images + i * n for i, p in enumerate(comps)]), check=False)

    def key(self):
        return (self.alpha.tolist(), self.beta.tolist(), self.gamma.tolist())


# -- fixed points of automorphisms ------------------------------------------------


def fixed_point_subquasigroup(L: LatinSquare, pi: Permutation) -> frozenset[int]:
    """Fix(pi), after checking it is a sub-quasigroup of order at most n/2."""
    if not is_automorphism(L, pi):
        raise NotAutomorphism("permutation is not an automorphism of the square")
    if pi.is_identity():
        raise IdentityInput("the identity fixes every point")
    fixed = frozenset(np.flatnonzero(pi.images == np.arange(L.n)).tolist())
    for g in fixed:
        for h in fixed:
            if L(g, h) not in fixed:
                raise ClosureViolation(f"{g}*{h} = {L(g, h)} leaves the fixed set")
            if L.left_divide(g, h) not in fixed or L.right_divide(g, h) not in fixed:
                raise ClosureViolation(f"division {g}, {h} leaves the fixed set")
    if 2 * len(fixed) > L.n:
        raise ClosureViolation(f"fixed set of size {len(fixed)} exceeds n/2 = {L.n / 2}")
    return fixed


# -- automorphism search ----------------------------------------------------------


def automorphisms(L: LatinSquare) -> list[Permutation]:
    """All automorphisms in lexicographic order of image tables.

    Images are chosen for the least unassigned point; every assignment is
    closed under pi(gh) = pi(g)pi(h) before the next choice.
    """
    n = L.n
    T = L.table
    image = [-1] * n
    used = [False] * n
    out = []

    def assign(x, y, trail):
        stack = [(x, y)]
        while stack:
            x, y = stack.pop()
            if image[x] >= 0:
                if image[x] != y:
                    return False
                continue
            if used[y]:
                return False
            image[x] = y
            used[y] = True
            trail.append(x)
            for z in range(n):
                if image[z] < 0:
                    continue
                stack.append((T[x][z], T[y][image[z]]))
                stack.append((T[z][x], T[image[z]][y]))
        return True

    def search():
        try:
            x = image.index(-1)
        except ValueError:
            out.append(Permutation(image, check=False))
            return
        for y in range(n):
            if used[y]:
                continue
            trail = []
            if assign(x, y, trail):
                search()
            for v in trail:
                used[image[v]] = False
                image[v] = -1

    search()
    return out


def autotopisms(L: LatinSquare) -> list[Autotopism]:
    """All autotopisms, sorted by (alpha, beta, gamma) image tables.

    The search branches on alpha and beta. Each cell (g, h) ties the three
    maps together, so any two of alpha(g), beta(h), gamma(gh) force the
    third; gamma is never branched on.
    """
    n = L.n
    T = L.table
    col_of = [{s: c for c, s in enumerate(T[r])} for r in range(n)]
    row_of = [{T[r][c]: r for r in range(n)} for c in range(n)]
    cells_with = [[(g, col_of[g][s]) for g in range(n)] for s in range(n)]
    maps = ([-1] * n, [-1] * n, [-1] * n)
    used = ([False] * n, [False] * n, [False] * n)
    out = []

    def assign(which, idx, val, trail):
        stack = [(which, idx, val)]
        while stack:
            which, idx, val = stack.pop()
            m = maps[which]
            if m[idx] >= 0:
                if m[idx] != val:
                    return False
                continue
            if used[which][val]:
                return False
            m[idx] = val
            used[which][val] = True
            trail.append((which, idx))
            if which == 0:
                cells = [(idx, h) for h in range(n)]
            elif which == 1:
                cells = [(g, idx) for g in range(n)]
            else:
                cells = cells_with[idx]
            A, B, C = maps
            for g, h in cells:
                s = T[g][h]
                a, b, c = A[g], B[h], C[s]
                if a >= 0 and b >= 0:
                    stack.append((2, s, T[a][b]))
                elif a >= 0 and c >= 0:
                    stack.append((1, h, col_of[a][c]))
                elif b >= 0 and c >= 0:
                    stack.append((0, g, row_of[b][c]))
        return True

    def search():
        for which in (0, 1):
            m = maps[which]
            if -1 in m:
                idx = m.index(-1)
                break
        else:
            perms = [Permutation(m, check=False) for m in maps]
            out.append(Autotopism(*perms))
            return
        for val in range(n):
            if used[which][val]:
                continue
            trail = []
            if assign(which, idx, val, trail):
                search()
            for w, i in reversed(trail):
                used[w][maps[w][i]] = False
                maps[w][i] = -1

    search()
    out.sort(key=Autotopism.key)
    return out


# -- bound checks -----------------------------------------------------------------------


@dataclass(frozen=True)
class Theorem1Report:
    n: int
    automorphism_count: int
    max_order: FactoredInteger
    orders: dict[int, int]
    violations: tuple[str, ...] = field(default=())

    @property
    def quarter_bound(self) -> float:
        return self.n * self.n / 4

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_kv(self) -> str:
        rows = [
            ("n", self.n),
            ("automorphisms", self.automorphism_count),
            ("max_automorphism_order", self.max_order.value()),
            ("bound_n2_over_4", repr(self.quarter_bound)),
            ("bound_n2", self.n * self.n),
            ("order_spectrum", " ".join(f"{o}:{c}" for o, c in sorted(self.orders.items()))),
            ("violations", len(self.violations)),
        ]
        rows += [("violation", v) for v in self.violations]
        return "".join(f"{k}={v}\n" for k, v in rows)


def _order_ge_square(order: FactoredInteger, m: int) -> bool:
    return order.value() >= m * m


def check_theorem1_bound(L: LatinSquare, autos: list[Permutation] | None = None) -> Theorem1Report:
    """Check automorphism orders against n**2/4 and n**2, and the fixed-set step.

    The n**2/4 comparison is only made for n >= 2. Every non-identity
    automorphism must fix a sub-quasigroup of order <= n/2, and any
    automorphism of order >= n**2 must have a power fixing >= n/2 points.
    """
    n = L.n
    if autos is None:
        autos = automorphisms(L)
    violations = []
    orders: dict[int, int] = {}
    max_order = FactoredInteger()
    for pi in autos:
        order = order_factored(pi)
        v = order.value()
        orders[v] = orders.get(v, 0) + 1
        if v > max_order.value():
            max_order = order
        tag = " ".join(map(str, pi.tolist()))
        if n >= 2 and 4 * v > n * n:
            violations.append(f"order {v} > n^2/4 for automorphism [{tag}]")
        if v > n * n:
            violations.append(f"order {v} > n^2 for automorphism [{tag}]")
        if not pi.is_identity():
            try:
                fixed_point_subquasigroup(L, pi)
            except ClosureViolation as exc:
                violations.append(f"{exc} for automorphism [{tag}]")
        if n >= 2 and not order.is_one() and _order_ge_square(order, n):
            w = best_witness(pi)
            if 2 * (n - w.witness_support_size) < n:
                violations.append(f"witness power of [{tag}] fixes fewer than n/2 points")
    return Theorem1Report(n, len(autos), max_order, orders, tuple(violations))


@dataclass(frozen=True)
class AutotopismReport:
    n: int
    autotopism_count: int
    max_order: FactoredInteger
    mmm_checked: int
    violations: tuple[str, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_kv(self) -> str:
        rows = [
            ("n", self.n),
            ("autotopisms", self.autotopism_count),
            ("max_autotopism_order", self.max_order.value()),
            ("bound_n2_over_4", repr(self.n * self.n / 4)),
            ("bound_4n2", 4 * self.n * self.n),
            ("mmm_checked", self.mmm_checked),
            ("violations", len(self.violations)),
        ]
        rows += [("violation", v) for v in self.violations]
        return "".join(f"{k}={v}\n" for k, v in rows)


def check_autotopism_bounds(L: LatinSquare, atps: list[Autotopism] | None = None) -> AutotopismReport:
    """Order bounds, faithfulness on two parts, and the equal-fixed-count property.

    For each autotopism: order <= n**2/4 (n >= 2) and <= 4n**2; alpha and
    beta both trivial forces gamma trivial; a non-identity triple with
    fixed points in both alpha and beta has the same number of fixed points
    in all three parts, at most n/2. Orders above (2n)**2 also get their
    small-support power on the two-part union checked for more than n fixed
    points.
    """
    n = L.n
    if atps is None:
        atps = autotopisms(L)
    violations = []
    max_order = FactoredInteger()
    mmm = 0
    for th in atps:
        order = th.order()
        v = order.value()
        if v > max_order.value():
            max_order = order
        tag = "; ".join(" ".join(map(str, p.tolist())) for p in (th.alpha, th.beta, th.gamma))
        if n >= 2 and 4 * v > n * n:
            violations.append(f"order {v} > n^2/4 for autotopism [{tag}]")
        if v > 4 * n * n:
            violations.append(f"order {v} > 4n^2 for autotopism [{tag}]")
        if th.alpha.is_identity() and th.beta.is_identity() and not th.gamma.is_identity():
            violations.append(f"not faithful on two parts: [{tag}]")
        fa, fb, fc = th.fixed_counts()
        if not th.is_identity() and fa >= 1 and fb >= 1:
            mmm += 1
            if not (fa == fb == fc and 2 * fa <= n):
                violations.append(f"fixed counts {fa}, {fb}, {fc} break the equal-count property [{tag}]")
        if not th.is_identity() and _order_ge_square(order, 2 * n):
            w = best_witness(th.on_union(2))
            if 2 * n - w.witness_support_size <= n:
                violations.append(f"witness power on two parts fixes at most n points [{tag}]")
    return AutotopismReport(n, len(atps), max_order, mmm, tuple(violations))


# -- enumeration ---------------------------------------------------------------------


def latin_squares(n: int, reduced: bool = False):
    """Yield every Latin square of order n (or every reduced one) in lexicographic order."""
    rows = list(itertools.permutations(range(n)))
    first = [tuple(range(n))] if reduced else rows
    table = []
    col_used = [set() for _ in range(n)]

    def extend():
        i = len(table)
        if i == n:
            yield LatinSquare(n, tuple(table))
            return
        for r in first if i == 0 else rows:
            if reduced and r[0] != i:
                continue
            if any(r[c] in col_used[c] for c in range(n)):
                continue
            table.append(r)
            for c in range(n):
                col_used[c].add(r[c])
            yield from extend()
            table.pop()
            for c in range(n):
                col_used[c].discard(r[c])

    yield from extend()


def _partitions(n, largest=None):
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for k in range(min(n, largest), 0, -1):
        for rest in _partitions(n - k, k):
            yield (k,) + rest


def square_with_automorphism(pi: Permutation) -> LatinSquare | None:
    """A Latin square admitting ``pi`` as an automorphism, or None if none exists.

    Choosing gh = s forces pi^k(g) pi^k(h) = pi^k(s) around the whole orbit
    of the cell (g, h), so cells are filled an orbit at a time.
    """
    n = pi.n
    p = pi.tolist()
    T = [[-1] * n for _ in range(n)]
    row_used = [[False] * n for _ in range(n)]
    col_used = [[False] * n for _ in range(n)]

    def place(g, h, s, trail):
        g0, h0, s0 = g, h, s
        while True:
            if T[g][h] >= 0 or row_used[g][s] or col_used[h][s]:
                return False
            T[g][h] = s
            row_used[g][s] = col_used[h][s] = True
            trail.append((g, h))
            g, h, s = p[g], p[h], p[s]
            if (g, h) == (g0, h0):
                return s == s0

    def undo(trail):
        for g, h in trail:
            s = T[g][h]
            row_used[g][s] = col_used[h][s] = False
            T[g][h] = -1

    def search():
        best = None
        for g in range(n):
            for h in range(n):
                if T[g][h] < 0:
                    opts = [s for s in range(n) if not row_used[g][s] and not col_used[h][s]]
                    if best is None or len(opts) < len(best[2]):
                        best = (g, h, opts)
        if best is None:
            return True
        g, h, opts = best
        for s in opts:
            trail = []
            if place(g, h, s, trail) and search():
                return True
            undo(trail)
        return False

    if not search():
        return None
    L = LatinSquare(n, tuple(map(tuple, T)))
    validate(L.table)
    assert is_automorphism(L, pi)
    return L


@dataclass(frozen=True)
class FMaxRow:
    n: int
    f: int
    exact: int
    witness: Permutation
    square: LatinSquare

    @property
    def quarter_bound(self) -> float:
        return self.n * self.n / 4


def _max_order_exact(n: int) -> tuple[int, Permutation, LatinSquare]:
    """Largest automorphism order among quasigroups of order exactly n.

    Relabelling conjugates automorphisms, so only one permutation per cycle
    type needs a search; cycle types are tried in decreasing order.
    """
    candidates = []
    for lengths in _partitions(n):
        cycles, start = [], 0
        for k in lengths:
            cycles.append(range(start, start + k))
            start += k
        pi = Permutation.from_cycles(n, cycles)
        candidates.append((order_factored(pi).value(), lengths, pi))
    candidates.sort(key=lambda c: (-c[0], c[1]))
    for order, _, pi in candidates:
        L = square_with_automorphism(pi)
        if L is not None:
            return order, pi, L
    raise AssertionError("the identity is an automorphism of every square")


def f_max_table(n_max: int, limit: int | None = None) -> list[FMaxRow]:
    if limit is None:
        limit = enumeration_limit()
    if n_max < 1:
        raise InputError(f"n_max must be at least 1, got {n_max}")
    if n_max > limit:
        raise TooLarge(f"n_max={n_max} exceeds the enumeration limit {limit} (SMALLSUPPORT_LIMIT_N)")
    rows = []
    f = 0
    for n in range(1, n_max + 1):
        exact, pi, L = _max_order_exact(n)
        f = max(f, exact)
        rows.append(FMaxRow(n, f, exact, pi, L))
    return rows


def f_max(n_max: int, limit: int | None = None) -> dict[int, int]:
    """f(n), the largest automorphism order over quasigroups of order <= n."""
    return {row.n: row.f for row in f_max_table(n_max, limit)}


# -- Steiner triple systems ------------------------------------------------------------


def sts_to_quasigroup(triples, n: int | None = None) -> LatinSquare:
    """xy is the third point on the line through x and y; xx = x."""
    if isinstance(triples, SteinerDesign):
        design = triples
        if design.k != 3:
            raise NotSTS(f"blocks have size {design.k}; only triple systems convert")
    else:
        try:
            design = validate_design(n, 3, triples)
        except (BadLineSize, PairCovered) as exc:
            raise NotSTS(str(exc)) from exc
    table = [[x if x == y else -1 for y in range(design.n)] for x in range(design.n)]
    for a, b, c in design.lines:
        for x, y, z in itertools.permutations((a, b, c)):
            table[x][y] = z
    return validate(table)


# -- text formats ------------------------------------------------------------------------


def parse_latin(text: str) -> LatinSquare:
    lines = [(i, ln) for i, ln in enumerate(text.splitlines(), 1) if ln.strip()]
    if not lines:
        raise ParseError("empty input", line=1)
    lineno, head = lines[0]
    try:
        n = int(head)
    except ValueError:
        raise ParseError(f"expected the order, got {head.strip()!r}", line=lineno) from None
    if len(lines) != n + 1:
        raise ParseError(f"expected {n} rows, found {len(lines) - 1}", line=lineno)
    rows = []
    for lineno, ln in lines[1:]:
        try:
            rows.append([int(t) for t in ln.split()])
        except ValueError:
            raise ParseError(f"non-integer entry in {ln.strip()!r}", line=lineno) from None
    return validate(rows)


def format_latin(L: LatinSquare) -> str:
    return f"{L.n}\n" + "".join(" ".join(map(str, r)) + "\n" for r in L.table)


def read_latin(path) -> LatinSquare:
    with open(path) as fh:
        return parse_latin(fh.read())


def parse_autotopism(text: str, square: LatinSquare | None = None) -> Autotopism:
    """Three permutation blocks separated by blank lines."""
    blocks, cur = [], []
    for ln in text.splitlines():
        if ln.strip():
            cur.append(ln)
        elif cur:
            blocks.append(cur)
            cur = []
    if cur:
        blocks.append(cur)
    if len(blocks) != 3:
        raise ParseError(f"expected 3 permutation blocks, found {len(blocks)}")
    perms = [parse_permutation("\n".join(b)) for b in blocks]
    if len({p.n for p in perms}) != 1:
        raise SizeMismatch("autotopism components act on different point sets")
    return Autotopism(*perms, square=square)


def format_autotopism(th: Autotopism) -> str:
    return "\n".join(format_permutation(p) for p in (th.alpha, th.beta, th.gamma))

