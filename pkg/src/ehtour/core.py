"""Exact tournament representation and the basic operations on it.

A tournament on ``n`` vertices is stored as one out-neighbour bitmask per
vertex.  Vertices are ``0..n-1`` internally and ``v1..vn`` in every piece of
text the package reads or writes.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

MAX_N = 1024
TR_EXACT_MAX = 24

Ordering = tuple[int, ...]
VertexSet = frozenset[int]


class TournamentError(ValueError):
    """Invalid tournament data or an operation applied outside its domain."""


class TRN1Error(TournamentError):
    """Malformed TRN1 text."""


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def members(mask: int) -> list[int]:
    """Vertices of a bitmask in ascending order."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


@dataclass(frozen=True, eq=True)
class Tournament:
    n: int
    out: tuple[int, ...]

    def __post_init__(self) -> None:
        if not 1 <= self.n <= MAX_N:
            raise TournamentError(f"vertex count {self.n} outside 1..{MAX_N}")
        if len(self.out) != self.n:
            raise TournamentError("need one out-mask per vertex")
        full = (1 << self.n) - 1
        for v, m in enumerate(self.out):
            if m & ~full or (m >> v) & 1:
                raise TournamentError(f"bad out-mask for vertex {v}")
        for v in range(self.n):
            for w in range(v + 1, self.n):
                if ((self.out[v] >> w) & 1) == ((self.out[w] >> v) & 1):
                    raise TournamentError(f"pair ({v}, {w}) is not oriented exactly once")

    # construction -------------------------------------------------------

    @classmethod
    def from_bits(cls, n: int, bits: str) -> Tournament:
        """Build from the TRN1 pair string; ``'1'`` at pair (i, j) means i -> j."""
        if len(bits) != pair_count(n):
            raise TournamentError(f"expected {pair_count(n)} bits for n={n}, got {len(bits)}")
        out = [0] * n
        k = 0
        for i in range(n):
            for j in range(i + 1, n):
                c = bits[k]
                if c == "1":
                    out[i] |= 1 << j
                elif c == "0":
                    out[j] |= 1 << i
                else:
                    raise TournamentError(f"non-binary character {c!r}")
                k += 1
        return cls(n, tuple(out))

    @classmethod
    def from_arcs(cls, n: int, arcs: Iterable[tuple[int, int]]) -> Tournament:
        """Build from a complete list of arcs ``(tail, head)``."""
        out = [0] * n
        for a, b in arcs:
            out[a] |= 1 << b
        return cls(n, tuple(out))

    @classmethod
    def from_ordering(cls, order: Sequence[int], backward: Iterable[tuple[int, int]]) -> Tournament:
        """Tournament whose only backward arcs under ``order`` are ``backward``.

        Every pair not listed points from the earlier to the later position.
        """
        n = len(order)
        pos = {v: i for i, v in enumerate(order)}
        back = set(backward)
        for a, b in back:
            if pos[a] <= pos[b]:
                raise TournamentError(f"arc {a}->{b} is not backward under the ordering")
        out = [0] * n
        for i in range(n):
            for j in range(i + 1, n):
                a, b = order[i], order[j]
                if (b, a) in back:
                    out[b] |= 1 << a
                else:
                    out[a] |= 1 << b
        return cls(n, tuple(out))

    @classmethod
    def transitive(cls, n: int) -> Tournament:
        """The transitive tournament with ordering ``(v1, ..., vn)``."""
        full = (1 << n) - 1
        return cls(n, tuple(full & ~((1 << (v + 1)) - 1) for v in range(n)))

    # queries ------------------------------------------------------------

    def __len__(self) -> int:
        return self.n

    @cached_property
    def full(self) -> int:
        return (1 << self.n) - 1

    @cached_property
    def inn(self) -> tuple[int, ...]:
        full = self.full
        return tuple(full & ~m & ~(1 << v) for v, m in enumerate(self.out))

    def edge(self, a: int, b: int) -> bool:
        """True iff the arc a -> b is present."""
        return bool((self.out[a] >> b) & 1)

    def outdegree(self, v: int, within: int | None = None) -> int:
        m = self.out[v]
        return popcount(m if within is None else m & within)

    def indegree(self, v: int, within: int | None = None) -> int:
        m = self.inn[v]
        return popcount(m if within is None else m & within)

    def arcs(self) -> list[tuple[int, int]]:
        return [(a, b) for a in range(self.n) for b in members(self.out[a])]

    @cached_property
    def bits(self) -> str:
        return "".join(
            "1" if (self.out[i] >> j) & 1 else "0"
            for i in range(self.n)
            for j in range(i + 1, self.n)
        )

    def is_transitive(self, vertices: Iterable[int] | None = None) -> bool:
        """True iff the vertices (default: all) induce a transitive tournament."""
        mask = self.full if vertices is None else mask_of(vertices)
        return is_transitive_mask(self, mask)

    def transitive_order(self, vertices: Iterable[int]) -> Ordering:
        """Transitive ordering (source first) of a transitive vertex set."""
        mask = mask_of(vertices)
        if not is_transitive_mask(self, mask):
            raise TournamentError("vertex set is not transitive")
        vs = members(mask)
        return tuple(sorted(vs, key=lambda v: -popcount(self.out[v] & mask)))

    def with_arc(self, a: int, b: int) -> Tournament:
        """Copy with the pair {a, b} oriented a -> b."""
        out = list(self.out)
        out[b] &= ~(1 << a)
        out[a] |= 1 << b
        return Tournament(self.n, tuple(out))

    @cached_property
    def tr_table(self) -> TransitiveTable:
        return TransitiveTable(self)

    def __repr__(self) -> str:
        return f"Tournament(n={self.n}, bits={self.bits!r})"


def is_transitive_mask(T: Tournament, mask: int) -> bool:
    # a tournament is transitive iff its score sequence is 0, 1, ..., k-1
    seen = 0
    for v in members(mask):
        d = popcount(T.out[v] & mask)
        if (seen >> d) & 1:
            return False
        seen |= 1 << d
    return True


# TRN1 text format ------------------------------------------------------


def parse(text: str) -> Tournament:
    """Parse TRN1 text: ``n`` on line 1, the pair bit string on line 2."""
    body = text[:-1] if text.endswith("\n") else text
    lines = body.split("\n")
    if len(lines) == 1:
        lines.append("")
    if len(lines) != 2:
        raise TRN1Error(f"expected 2 lines, got {len(lines)}")
    header, bits = lines
    if not header.isdigit():
        raise TRN1Error(f"malformed header {header!r}")
    n = int(header)
    if not 1 <= n <= MAX_N:
        raise TRN1Error(f"n={n} outside 1..{MAX_N}")
    if set(bits) - {"0", "1"}:
        raise TRN1Error("bit string contains non-binary characters")
    if len(bits) != pair_count(n):
        raise TRN1Error(f"bit string has length {len(bits)}, expected {pair_count(n)}")
    return Tournament.from_bits(n, bits)


def serialize(T: Tournament) -> str:
    return f"{T.n}\n{T.bits}"


def read_trn1(path: str) -> Tournament:
    with open(path, encoding="ascii") as fh:
        return parse(fh.read())


# derived tournaments -----------------------------------------------------


def reverse(T: Tournament) -> Tournament:
    """T^c: every arc flipped."""
    return Tournament(T.n, T.inn)


def permuted(T: Tournament, order: Sequence[int]) -> Tournament:
    """Tournament whose vertex ``i`` is ``order[i]`` of ``T``."""
    return induced_ordered(T, order)


def relabel(T: Tournament, perm: Sequence[int]) -> Tournament:
    """Rename vertex ``v`` to ``perm[v]``."""
    check_ordering(T, perm)
    out = [0] * T.n
    for a in range(T.n):
        for b in members(T.out[a]):
            out[perm[a]] |= 1 << perm[b]
    return Tournament(T.n, tuple(out))


def induced_ordered(T: Tournament, seq: Sequence[int]) -> Tournament:
    """Subtournament on ``seq`` with ``seq[i]`` renamed to ``i``."""
    if not seq:
        raise TournamentError("empty vertex set")
    if len(set(seq)) != len(seq):
        raise TournamentError("repeated vertex")
    out = []
    for a in seq:
        m = 0
        row = T.out[a]
        for i, b in enumerate(seq):
            if (row >> b) & 1:
                m |= 1 << i
        out.append(m)
    return Tournament(len(seq), tuple(out))


def induced(T: Tournament, S: Iterable[int]) -> tuple[Tournament, tuple[int, ...]]:
    """Induced subtournament and its label map (new vertex i was ``labels[i]``)."""
    labels = tuple(sorted(set(S)))
    if not labels:
        raise TournamentError("induced subtournament of an empty set")
    if labels[0] < 0 or labels[-1] >= T.n:
        raise TournamentError("vertex out of range")
    return induced_ordered(T, labels), labels


def substitute(T1: Tournament, v: int, T2: Tournament) -> Tournament:
    """Replace vertex ``v`` of ``T1`` by a copy of ``T2``.

    The copy occupies labels ``v .. v+|T2|-1``; later vertices of ``T1`` shift
    up by ``|T2| - 1``.
    """
    if not 0 <= v < T1.n:
        raise TournamentError(f"vertex {v} not in T1")
    k = T2.n
    n = T1.n + k - 1

    def place(a: int) -> int:
        return a if a < v else a + k - 1

    out = [0] * n
    for a in range(T1.n):
        if a == v:
            continue
        for b in range(T1.n):
            if b == a or not T1.edge(a, b):
                continue
            if b == v:
                for i in range(k):
                    out[place(a)] |= 1 << (v + i)
            else:
                out[place(a)] |= 1 << place(b)
    for i in range(k):
        for j in members(T2.out[i]):
            out[v + i] |= 1 << (v + j)
        for b in range(T1.n):
            if b != v and T1.edge(v, b):
                out[v + i] |= 1 << place(b)
    return Tournament(n, tuple(out))


def random_tournament(n: int, seed: int) -> Tournament:
    """Uniform random tournament from Python's Mersenne Twister (``random.Random(seed)``).

    One ``getrandbits`` draw covers all pairs; bit ``k`` (least significant
    first) orients the ``k``-th pair of the TRN1 order.
    """
    if not 1 <= n <= MAX_N:
        raise TournamentError(f"n={n} outside 1..{MAX_N}")
    rng = random.Random(seed)
    p = pair_count(n)
    word = rng.getrandbits(p) if p else 0
    bits = "".join("1" if (word >> k) & 1 else "0" for k in range(p))
    return Tournament.from_bits(n, bits)


# orderings and backward arcs ---------------------------------------------


def check_ordering(T: Tournament, order: Sequence[int]) -> None:
    if sorted(order) != list(range(T.n)):
        raise TournamentError("ordering is not a permutation of the vertex set")


@dataclass(frozen=True)
class BackwardEdgeGraph:
    ordering: Ordering
    arcs: frozenset[tuple[int, int]]  # (later tail, earlier head)

    @property
    def edges(self) -> frozenset[tuple[int, int]]:
        """Unordered pairs, each stored as ``(min, max)``."""
        return frozenset((min(a, b), max(a, b)) for a, b in self.arcs)

    def position_arcs(self) -> frozenset[tuple[int, int]]:
        """The backward arcs as ``(later position, earlier position)``."""
        pos = {v: i for i, v in enumerate(self.ordering)}
        return frozenset((pos[a], pos[b]) for a, b in self.arcs)


def backward_graph(T: Tournament, order: Sequence[int]) -> BackwardEdgeGraph:
    check_ordering(T, order)
    arcs = set()
    earlier = 0
    for v in order:
        for w in members(T.out[v] & earlier):
            arcs.add((v, w))
        earlier |= 1 << v
    return BackwardEdgeGraph(tuple(order), frozenset(arcs))


# transitive subtournaments ------------------------------------------------


class TransitiveTable:
    """Memoised ``m(S) = max over v in S of 1 + m(S & out(v))``.

    ``m(S)`` is the size of a largest transitive subset of ``S`` (``v`` is its
    source).  The table is filled lazily and belongs to one tournament.
    """

    def __init__(self, T: Tournament) -> None:
        self.T = T
        self._memo: dict[int, int] = {0: 0}

    def size(self, mask: int) -> int:
        if popcount(mask) > TR_EXACT_MAX:
            raise TournamentError(f"exact tr is limited to {TR_EXACT_MAX} vertices")
        return self._m(mask)

    def _m(self, S: int) -> int:
        memo = self._memo
        hit = memo.get(S)
        if hit is not None:
            return hit
        out = self.T.out
        total = popcount(S)
        best = 0
        rest = S
        while rest:
            low = rest & -rest
            rest ^= low
            sub = S & out[low.bit_length() - 1]
            if 1 + popcount(sub) <= best:
                continue
            val = 1 + self._m(sub)
            if val > best:
                best = val
                if best == total:
                    break
        memo[S] = best
        return best

    def witness(self, mask: int) -> Ordering:
        """A largest transitive subset of ``mask`` in transitive order."""
        target = self.size(mask)
        order = []
        S = mask
        while target:
            for v in members(S):
                sub = S & self.T.out[v]
                if 1 + self._m(sub) == target:
                    order.append(v)
                    S = sub
                    target -= 1
                    break
        return tuple(order)


def max_transitive(T: Tournament, S: Iterable[int] | None = None) -> tuple[int, VertexSet]:
    """``tr`` of ``T`` (or of the subset ``S``) with a witness set."""
    mask = T.full if S is None else mask_of(S)
    table = T.tr_table
    w = table.witness(mask)
    return len(w), frozenset(w)


def greedy_transitive(T: Tournament, S: Iterable[int]) -> Ordering:
    """A transitive subset of ``S`` built greedily; a lower bound on tr(S)."""
    mask = mask_of(S)
    order = []
    while mask:
        v = max(members(mask), key=lambda x: (popcount(T.out[x] & mask), -x))
        order.append(v)
        mask &= T.out[v]
    return tuple(order)


def tr_upper_bound(T: Tournament) -> int:
    """Upper bound on tr(T): exact when n <= 24, else n minus a cyclic-triangle packing.

    Each vertex-disjoint cyclic triangle loses at least one vertex from any
    transitive subset.
    """
    if T.n <= TR_EXACT_MAX:
        return T.tr_table.size(T.full)
    free = T.full
    packed = 0
    for a in range(T.n):
        if not (free >> a) & 1:
            continue
        for b in members(T.out[a] & free):
            cs = T.out[b] & T.inn[a] & free
            if cs:
                c = (cs & -cs).bit_length() - 1
                free &= ~((1 << a) | (1 << b) | (1 << c))
                packed += 1
                break
    return T.n - packed


# densities ------------------------------------------------------------------


def forward_count(T: Tournament, X: Iterable[int], Y: Iterable[int]) -> int:
    """``e_{X,Y}``: number of arcs from X to Y."""
    ym = mask_of(Y)
    return sum(popcount(T.out[x] & ym) for x in set(X))


def density(T: Tournament, X: Iterable[int], Y: Iterable[int]) -> Fraction:
    """Directed density ``e_{X,Y} / (|X||Y|)`` as an exact fraction."""
    xs, ys = set(X), set(Y)
    if not xs or not ys:
        raise TournamentError("density needs two nonempty sets")
    if xs & ys:
        raise TournamentError("density needs disjoint sets")
    return Fraction(forward_count(T, xs, ys), len(xs) * len(ys))


# named tournaments ----------------------------------------------------------


def _v(*labels: int) -> tuple[int, ...]:
    return tuple(x - 1 for x in labels)


def _arcs1(pairs: Iterable[tuple[int, int]]) -> list[tuple[int, int]]:
    return [(a - 1, b - 1) for a, b in pairs]


# Named orderings (1-based) and their backward arcs.
NAMED_ORDERINGS: dict[tuple[str, str], tuple[tuple[int, ...], list[tuple[int, int]]]] = {
    ("K6", "canonical"): ((1, 2, 3, 4, 5, 6), [(4, 1), (6, 3), (6, 1), (5, 2)]),
    ("L1", "forest"): ((3, 4, 5, 1, 2, 6), [(1, 3), (2, 4), (2, 3), (6, 5)]),
    ("L1", "cyclic"): ((2, 4, 1, 3, 6, 5), [(1, 2), (5, 1), (5, 2), (3, 4)]),
    ("L2", "forest"): ((1, 2, 3, 4, 6, 5), [(4, 1), (5, 2), (5, 1), (6, 3)]),
    ("L2", "cyclic"): ((2, 4, 1, 6, 3, 5), [(1, 2), (5, 1), (5, 2), (3, 4)]),
}

_C5_ARCS = [(1, 2), (2, 3), (3, 4), (4, 5), (5, 1), (1, 3), (2, 4), (3, 5), (4, 1), (5, 2)]

NAMES = ("K6", "C5", "L1", "L2", "K6c", "C5c", "L1c", "L2c")


def named_ordering(name: str, which: str) -> tuple[Ordering, frozenset[tuple[int, int]]]:
    """0-based ordering and backward arcs of a named ordering, e.g. ``("L2", "forest")``."""
    order, back = NAMED_ORDERINGS[(name, which)]
    return _v(*order), frozenset(_arcs1(back))


def named(name: str) -> Tournament:
    """One of K6, C5, L1, L2 or their reversals (suffix ``c``); case-insensitive."""
    key = {x.lower(): x for x in NAMES}.get(name.lower())
    if key is None:
        raise TournamentError(f"unknown tournament name {name!r}; expected one of {', '.join(NAMES)}")
    if key.endswith("c"):
        return reverse(named(key[:-1]))
    if key == "C5":
        return Tournament.from_arcs(5, _arcs1(_C5_ARCS))
    which = "canonical" if key == "K6" else "forest"
    order, back = named_ordering(key, which)
    return Tournament.from_ordering(order, back)
