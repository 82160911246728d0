"""Permutations of {0, ..., n-1}, their cycle structure and factored orders.

Orders are kept as :class:`FactoredInteger` throughout: the lcm of the cycle
lengths of a permutation of 100 points already overflows 64 bits, and every
consumer here only needs the prime factorisation anyway.

Composition follows the right-action convention ``x^(pq) = (x^p)^q``, so
``p * q`` applies ``p`` first.
"""

from __future__ import annotations

import math
import re
import threading
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Union

import numpy as np

from .errors import NotAPermutation, ParseError

__all__ = [
    "Cycle",
    "CycleStructure",
    "FactoredInteger",
    "Permutation",
    "cycle_decomposition",
    "degree",
    "factor_small",
    "format_permutation",
    "order_factored",
    "parse_permutation",
    "points_in_cycles_divisible_by",
    "power",
    "read_permutation",
    "smallest_prime_factors",
    "support",
]


# -- primes ----------------------------------------------------------------

_spf = np.zeros(0, dtype=np.int64)
_spf_lock = threading.Lock()


def smallest_prime_factors(limit: int) -> np.ndarray:
    """Return a table ``spf`` with ``spf[x]`` the least prime factor of x.

    The table covers at least ``0..limit``; it is shared and only ever
    grows, so repeated calls for the same ``n`` cost nothing.
    """
    global _spf
    table = _spf
    if limit < len(table):
        return table
    with _spf_lock:
        if limit < len(_spf):
            return _spf
        size = max(limit + 1, 2 * len(_spf), 64)
        spf = np.zeros(size, dtype=np.int64)
        for p in range(2, math.isqrt(size - 1) + 1):
            if spf[p] == 0:
                block = spf[p * p :: p]
                block[block == 0] = p
        unset = spf == 0
        spf[unset] = np.flatnonzero(unset)
        spf.setflags(write=False)
        _spf = spf
        return spf


def factor_small(x: int, spf: np.ndarray | None = None) -> dict[int, int]:
    """Factor ``x >= 1`` using a smallest-prime-factor table."""
    if x < 1:
        raise ValueError(f"cannot factor {x}")
    if spf is None or x >= len(spf):
        spf = smallest_prime_factors(x)
    out: dict[int, int] = {}
    while x > 1:
        p = int(spf[x])
        e = 0
        while x % p == 0:
            x //= p
            e += 1
        out[p] = e
    return out


def _is_prime(p: int) -> bool:
    """Deterministic Miller-Rabin, exact for p < 3.3e24."""
    if p < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    if p in small:
        return True
    if any(p % a == 0 for a in small):
        return False
    d, s = p - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, p)
        if x in (1, p - 1):
            continue
        for _ in range(s - 1):
            x = x * x % p
            if x == p - 1:
                break
        else:
            return False
    return True


class FactoredInteger:
    """A positive integer held as ``{prime: exponent}``.

    The empty map is 1. Values are never materialised unless :meth:`value`
    is called explicitly.
    """

    __slots__ = ("_items",)

    def __init__(self, factors: dict[int, int] | Iterable[tuple[int, int]] | None = None):
        items = dict(factors or {})
        clean = {}
        for p, e in items.items():
            p, e = int(p), int(e)
            if e < 0:
                raise ValueError(f"negative exponent {e} for {p}")
            if e == 0:
                continue
            if not _is_prime(p):
                raise ValueError(f"{p} is not prime")
            clean[p] = e
        self._items = tuple(sorted(clean.items()))

    @classmethod
    def from_int(cls, value: int) -> FactoredInteger:
        if value < 1:
            raise ValueError(f"{value} is not a positive integer")
        if value < 1 << 24:
            return cls(factor_small(value))
        factors = {}
        x = value
        d = 2
        while d * d <= x:
            while x % d == 0:
                factors[d] = factors.get(d, 0) + 1
                x //= d
            d += 1 if d == 2 else 2
        if x > 1:
            factors[x] = factors.get(x, 0) + 1
        return cls(factors)

    @property
    def factors(self) -> dict[int, int]:
        return dict(self._items)

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self._items)

    def prime_powers(self) -> dict[int, int]:
        """Map each prime p to its full prime-power part p**e."""
        return {p: p**e for p, e in self._items}

    def exponent(self, p: int) -> int:
        return dict(self._items).get(p, 0)

    def is_one(self) -> bool:
        return not self._items

    def value(self) -> int:
        out = 1
        for p, e in self._items:
            out *= p**e
        return out

    def log(self) -> float:
        return math.fsum(e * math.log(p) for p, e in self._items)

    def mod(self, modulus: int) -> int:
        """Residue modulo ``modulus`` without materialising the value."""
        if modulus == 1:
            return 0
        r = 1
        for p, e in self._items:
            r = r * pow(p, e, modulus) % modulus
        return r

    def divides(self, other: FactoredInteger) -> bool:
        theirs = dict(other._items)
        return all(theirs.get(p, 0) >= e for p, e in self._items)

    def lcm(self, *others: FactoredInteger) -> FactoredInteger:
        out = dict(self._items)
        for other in others:
            for p, e in other._items:
                if e > out.get(p, 0):
                    out[p] = e
        return FactoredInteger(out)

    def divide_by_prime(self, p: int) -> FactoredInteger:
        out = dict(self._items)
        if p not in out:
            raise ValueError(f"{p} does not divide {self}")
        out[p] -= 1
        return FactoredInteger(out)

    def __mul__(self, other: FactoredInteger) -> FactoredInteger:
        out = dict(self._items)
        for p, e in other._items:
            out[p] = out.get(p, 0) + e
        return FactoredInteger(out)

    def __eq__(self, other):
        if isinstance(other, FactoredInteger):
            return self._items == other._items
        if isinstance(other, int):
            return other >= 1 and self.value() == other
        return NotImplemented

    def __hash__(self):
        return hash(self._items)

    def __int__(self):
        return self.value()

    def __str__(self):
        if not self._items:
            return "1"
        return " ".join(str(p) if e == 1 else f"{p}^{e}" for p, e in self._items)

    def __repr__(self):
        return f"FactoredInteger({dict(self._items)!r})"

    @classmethod
    def parse(cls, text: str) -> FactoredInteger:
        """Inverse of ``str``: ``"2^2 3"`` -> {2: 2, 3: 1}."""
        text = text.strip()
        if text == "1":
            return cls()
        out: dict[int, int] = {}
        for tok in text.split():
            p, _, e = tok.partition("^")
            out[int(p)] = out.get(int(p), 0) + (int(e) if e else 1)
        return cls(out)


# -- permutations ------------------------------------------------------------


def _bijection_error(arr: np.ndarray) -> NotAPermutation | None:
    n = len(arr)
    bad = np.flatnonzero((arr < 0) | (arr >= n))
    if len(bad):
        i = int(bad[0])
        return NotAPermutation(f"image {int(arr[i])} at position {i} is outside 0..{n - 1}")
    counts = np.bincount(arr, minlength=n)
    if np.all(counts == 1):
        return None
    dup = int(np.flatnonzero(counts > 1)[0])
    missing = int(np.flatnonzero(counts == 0)[0])
    return NotAPermutation(
        f"not a bijection: value {dup} is duplicated and value {missing} is missing",
        duplicated=dup,
        missing=missing,
    )


class Permutation:
    """A bijection of {0, ..., n-1} stored as its image table."""

    def __init__(self, images, *, check: bool = True):
        arr = np.array(images, dtype=np.int64)
        if arr.ndim != 1 or arr.size == 0:
            raise NotAPermutation("a permutation needs a non-empty 1-d image table")
        if check:
            err = _bijection_error(arr)
            if err is not None:
                raise err
        arr.setflags(write=False)
        self._images = arr

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(np.arange(n), check=False)

    @classmethod
    def from_cycles(cls, n: int, cycles: Iterable[Iterable[int]]) -> Permutation:
        """Multiply disjoint cycles together; points not mentioned are fixed."""
        images = np.arange(n)
        seen = set()
        for cyc in cycles:
            cyc = [int(x) for x in cyc]
            if seen.intersection(cyc) or len(set(cyc)) != len(cyc):
                raise NotAPermutation(f"cycles are not disjoint at {cyc}")
            seen.update(cyc)
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                images[a] = b
        return cls(images)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> Permutation:
        return cls(rng.permutation(n), check=False)

    @property
    def n(self) -> int:
        return len(self._images)

    @property
    def images(self) -> np.ndarray:
        return self._images

    def __len__(self):
        return len(self._images)

    def __call__(self, x: int) -> int:
        return int(self._images[x])

    __getitem__ = __call__

    def tolist(self) -> list[int]:
        return self._images.tolist()

    def __eq__(self, other):
        if not isinstance(other, Permutation):
            return NotImplemented
        return np.array_equal(self._images, other._images)

    def __hash__(self):
        return hash(self._images.tobytes())

    def __lt__(self, other: Permutation) -> bool:
        return self.tolist() < other.tolist()

    def __mul__(self, other: Permutation) -> Permutation:
        if other.n != self.n:
            raise ValueError("permutations act on different point sets")
        return Permutation(other._images[self._images], check=False)

    def inverse(self) -> Permutation:
        inv = np.empty_like(self._images)
        inv[self._images] = np.arange(self.n)
        return Permutation(inv, check=False)

    def is_identity(self) -> bool:
        return bool(np.array_equal(self._images, np.arange(self.n)))

    @cached_property
    def cycles(self) -> CycleStructure:
        return cycle_decomposition(self)

    def order(self) -> FactoredInteger:
        return order_factored(self.cycles)

    def __repr__(self):
        if self.n > 50:
            return f"<Permutation n={self.n}>"
        cyc = [c.points for c in self.cycles.cycles if c.length > 1]
        body = "".join("(" + " ".join(map(str, c)) + ")" for c in cyc) or "()"
        return f"Permutation({body}, n={self.n})"


class Cycle(NamedTuple):
    representative: int
    length: int
    points: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class CycleStructure:
    """Disjoint-cycle decomposition, fixed points included as 1-cycles.

    ``order`` lists all points cycle by cycle; cycle ``c`` occupies
    ``order[starts[c]:starts[c + 1]]`` beginning at its least point.
    """

    n: int
    order: np.ndarray
    starts: np.ndarray
    point_to_cycle: np.ndarray

    @cached_property
    def lengths(self) -> np.ndarray:
        return np.diff(self.starts)

    @cached_property
    def cycles(self) -> tuple[Cycle, ...]:
        pts = self.order.tolist()
        bounds = self.starts.tolist()
        return tuple(
            Cycle(pts[a], b - a, tuple(pts[a:b])) for a, b in zip(bounds, bounds[1:])
        )

    def __len__(self):
        return len(self.starts) - 1

    def length_through(self, x: int) -> int:
        c = self.point_to_cycle[x]
        return int(self.starts[c + 1] - self.starts[c])

    def cycle_type(self) -> dict[int, int]:
        """Map cycle length -> number of cycles of that length."""
        vals, counts = np.unique(self.lengths, return_counts=True)
        return dict(zip(vals.tolist(), counts.tolist()))

    def to_permutation(self) -> Permutation:
        return Permutation.from_cycles(self.n, (c.points for c in self.cycles))


def cycle_decomposition(perm: Permutation) -> CycleStructure:
    """Cycles in increasing order of their least point."""
    img = perm.images.tolist()
    n = len(img)
    seen = bytearray(n)
    ptc = [0] * n
    order: list[int] = []
    starts = [0]
    c = 0
    for s in range(n):
        if seen[s]:
            continue
        x = s
        while not seen[x]:
            seen[x] = 1
            order.append(x)
            ptc[x] = c
            x = img[x]
        c += 1
        starts.append(len(order))
    arrays = [np.array(a, dtype=np.int64) for a in (order, starts, ptc)]
    for a in arrays:
        a.setflags(write=False)
    return CycleStructure(n, *arrays)


def _as_cycles(obj: Permutation | CycleStructure) -> CycleStructure:
    return obj.cycles if isinstance(obj, Permutation) else obj


def order_factored(cs: CycleStructure | Permutation) -> FactoredInteger:
    """lcm of the cycle lengths; exponent of p is its max over the lengths."""
    cs = _as_cycles(cs)
    lengths = np.unique(cs.lengths)
    spf = smallest_prime_factors(int(lengths[-1]))
    out: dict[int, int] = {}
    for length in lengths.tolist():
        for p, e in factor_small(length, spf).items():
            if e > out.get(p, 0):
                out[p] = e
    return FactoredInteger(out)


def support(perm: Permutation) -> frozenset[int]:
    return frozenset(np.flatnonzero(perm.images != np.arange(perm.n)).tolist())


def degree(perm: Permutation) -> int:
    """Size of the support."""
    return int(np.count_nonzero(perm.images != np.arange(perm.n)))


def power(perm: Permutation, m: Union[FactoredInteger, int]) -> Permutation:
    """``perm**m`` computed cycle by cycle.

    A point on a cycle of length L moves ``m mod L`` steps along it; for a
    factored ``m`` the residue comes from modular exponentiation, so ``m``
    may be astronomically large.
    """
    cs = perm.cycles
    lengths = cs.lengths
    uniq, inv = np.unique(lengths, return_inverse=True)
    if isinstance(m, FactoredInteger):
        shifts = np.array([m.mod(int(L)) for L in uniq], dtype=np.int64)
    else:
        shifts = np.array([int(m) % int(L) for L in uniq], dtype=np.int64)
    shift = shifts[inv]
    cyc = np.repeat(np.arange(len(lengths)), lengths)
    start = cs.starts[cyc]
    pos = np.arange(perm.n)
    newpos = start + (pos - start + shift[cyc]) % lengths[cyc]
    images = np.empty(perm.n, dtype=np.int64)
    images[cs.order] = cs.order[newpos]
    return Permutation(images, check=False)


def points_in_cycles_divisible_by(cs: CycleStructure | Permutation, q: int) -> int:
    """Number of points whose cycle length is a multiple of ``q``."""
    lengths = _as_cycles(cs).lengths
    return int(lengths[lengths % q == 0].sum())


# -- text format -----------------------------------------------------------


def parse_permutation(text: str) -> Permutation:
    """Parse ``n`` on the first line and the n images on the second."""
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise ParseError("empty input", line=1)
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise ParseError(f"expected the point count, got {lines[0].strip()!r}", line=1) from None
    if n < 1:
        raise ParseError(f"point count must be at least 1, got {n}", line=1)
    if len(lines) < 2:
        raise ParseError("missing image line", line=2)
    if len(lines) > 2:
        raise ParseError("unexpected extra content", line=3)
    tokens = lines[1].split()
    if len(tokens) != n:
        raise ParseError(f"expected {n} images, found {len(tokens)}", line=2)
    try:
        arr = np.array(tokens).astype(np.int64)
    except ValueError:
        for match in re.finditer(r"\S+", lines[1]):
            if not re.fullmatch(r"[+-]?\d+", match.group()):
                raise ParseError(
                    f"not an integer: {match.group()!r}", line=2, column=match.start() + 1
                ) from None
        raise
    err = _bijection_error(arr)
    if err is not None:
        raise NotAPermutation(f"line 2: {err}", err.duplicated, err.missing)
    return Permutation(arr, check=False)


def format_permutation(perm: Permutation) -> str:
    return f"{perm.n}\n{' '.join(map(str, perm.tolist()))}\n"


def read_permutation(path) -> Permutation:
    with open(path) as fh:
        return parse_permutation(fh.read())
