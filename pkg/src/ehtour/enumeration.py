"""Canonical forms, isomorphism, class enumeration and pattern containment."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations
from typing import Iterator, Sequence

import numpy as np

from .core import Ordering, Tournament, TournamentError, pair_count, popcount

CANON_MAX_N = 8
ENUM_MAX_N = 7


def canonical_labeling(T: Tournament) -> tuple[str, Ordering]:
    """Lexicographically least TRN1 bit string over all vertex orderings.

    Returns the string and one ordering attaining it.  Rows of the bit string
    are fixed one position at a time: after placing ``p_1..p_k`` the unplaced
    vertices form an ordered partition by their adjacency to the placed ones,
    and within each cell the inneighbours of ``p_k`` must come first (they
    contribute 0 bits).  Only prefixes whose rows are minimal survive, so the
    search is exact while touching far fewer than ``n!`` orderings.
    """
    n = T.n
    if n > CANON_MAX_N:
        raise TournamentError(f"canonical forms are limited to n <= {CANON_MAX_N}")
    out, inn = T.out, T.inn
    # initial cells: by outdegree, low first, since the first row is 0^(n-1-d) 1^d
    degs = sorted({popcount(m) for m in out})
    first_cells = []
    for d in degs:
        cell = 0
        for v in range(n):
            if popcount(out[v]) == d:
                cell |= 1 << v
        first_cells.append(cell)
    # the first vertex must have minimum outdegree; other cells merge back
    # into one unordered pool for refinement
    states: list[tuple[tuple[int, ...], tuple[int, ...]]] = [((), (T.full,))]
    rows: list[str] = []
    for k in range(n):
        best_row = None
        nxt: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
        for placed, cells in states:
            head = cells[0]
            cands = head & first_cells[0] if k == 0 else head
            rest_cells = cells[1:]
            c = cands
            while c:
                low = c & -c
                c ^= low
                v = low.bit_length() - 1
                refined = []
                row = 0
                length = 0
                for cell in ((head ^ low),) + rest_cells:
                    if not cell:
                        continue
                    i_part = cell & inn[v]
                    o_part = cell & out[v]
                    ni, no = popcount(i_part), popcount(o_part)
                    row = (row << (ni + no)) | ((1 << no) - 1)
                    length += ni + no
                    if i_part:
                        refined.append(i_part)
                    if o_part:
                        refined.append(o_part)
                if best_row is None or row < best_row:
                    best_row = row
                    nxt = []
                if row == best_row:
                    nxt.append((placed + (v,), tuple(refined)))
        rows.append(format(best_row, f"0{n - 1 - k}b") if n - 1 - k else "")
        states = nxt
    return "".join(rows), states[0][0]


def canonical_form(T: Tournament) -> str:
    return canonical_labeling(T)[0]


def canonical_tournament(T: Tournament) -> Tournament:
    return Tournament.from_bits(T.n, canonical_form(T))


def is_isomorphic(T1: Tournament, T2: Tournament) -> tuple[bool, tuple[int, ...] | None]:
    """Isomorphism test with a witness ``f`` (``f[v]`` is the image of v in T2)."""
    if T1.n != T2.n:
        return False, None
    s1, o1 = canonical_labeling(T1)
    s2, o2 = canonical_labeling(T2)
    if s1 != s2:
        return False, None
    f = [0] * T1.n
    for a, b in zip(o1, o2):
        f[a] = b
    return True, tuple(f)


def isomorphic(T1: Tournament, T2: Tournament) -> bool:
    return is_isomorphic(T1, T2)[0]


# enumeration ---------------------------------------------------------------


def _extensions(bits: str, n: int) -> set[str]:
    """Canonical forms of all one-vertex extensions of an (n-1)-vertex class."""
    base = Tournament.from_bits(n - 1, bits)
    found = set()
    for pattern in range(1 << (n - 1)):
        out = list(base.out) + [0]
        for v in range(n - 1):
            if (pattern >> v) & 1:
                out[n - 1] |= 1 << v
            else:
                out[v] |= 1 << (n - 1)
        found.add(canonical_form(Tournament(n, tuple(out))))
    return found


def enumerate_classes(n: int, jobs: int = 1) -> list[str]:
    """One canonical bit string per isomorphism class, sorted.

    Orderly generation: every class on ``n`` vertices minus its last vertex
    is some class on ``n - 1`` vertices, so extending all of those by a new
    vertex in every possible way and deduplicating reaches every class.
    """
    if not 1 <= n <= ENUM_MAX_N:
        raise TournamentError(f"enumeration supports 1 <= n <= {ENUM_MAX_N}")
    return list(_enumerate_cached(n, max(1, jobs)))


@lru_cache(maxsize=None)
def _enumerate_cached(n: int, jobs: int) -> tuple[str, ...]:
    if n == 1:
        return ("",)
    prev = _enumerate_cached(n - 1, jobs)
    found: set[str] = set()
    if jobs > 1 and len(prev) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for part in pool.map(_extensions, prev, [n] * len(prev)):
                found |= part
    else:
        for bits in prev:
            found |= _extensions(bits, n)
    return tuple(sorted(found))


def _pair_index(n: int) -> dict[tuple[int, int], int]:
    return {p: k for k, p in enumerate(combinations(range(n), 2))}


def enumerate_classes_labeled(n: int) -> list[str]:
    """Classes by sweeping every labeled tournament on ``n`` vertices.

    Independent of :func:`canonical_labeling`: the first unvisited labeled
    tournament seeds an orbit, all ``n!`` relabelings of it are computed at
    once with numpy and marked visited, and the orbit minimum is recorded.
    """
    if not 1 <= n <= ENUM_MAX_N:
        raise TournamentError(f"enumeration supports 1 <= n <= {ENUM_MAX_N}")
    L = pair_count(n)
    if L == 0:
        return [""]
    idx = _pair_index(n)
    perms = list(permutations(range(n)))
    src = np.empty((len(perms), L), dtype=np.int64)
    flip = np.empty((len(perms), L), dtype=np.int64)
    for r, p in enumerate(perms):
        for (i, j), k in idx.items():
            a, b = p[i], p[j]
            if a < b:
                src[r, k], flip[r, k] = idx[(a, b)], 0
            else:
                src[r, k], flip[r, k] = idx[(b, a)], 1
    # bit string position k is integer bit L-1-k, so numeric order = lexicographic
    src_shift = (L - 1 - src).astype(np.int64)
    out_weight = (1 << (L - 1 - np.arange(L))).astype(np.int64)
    visited = np.zeros(1 << L, dtype=bool)
    classes = []
    ptr = 0
    total = 1 << L
    while ptr < total:
        code = ptr
        images = (((code >> src_shift) & 1) ^ flip) @ out_weight
        visited[images] = True
        classes.append(format(int(images.min()), f"0{L}b"))
        rest = visited[ptr:]
        if rest.all():
            break
        ptr += int(np.argmin(rest))
    return sorted(classes)


# containment ------------------------------------------------------------------


@dataclass(frozen=True)
class Embedding:
    pattern: Tournament
    host: Tournament
    map: tuple[int, ...]  # pattern vertex -> host vertex

    def is_valid(self) -> bool:
        m = self.map
        if len(m) != self.pattern.n or len(set(m)) != len(m):
            return False
        if any(not 0 <= h < self.host.n for h in m):
            return False
        return all(
            self.pattern.edge(a, b) == self.host.edge(m[a], m[b])
            for a in range(self.pattern.n)
            for b in range(self.pattern.n)
            if a != b
        )


def _embeddings(host: Tournament, pattern: Tournament) -> Iterator[tuple[int, ...]]:
    k = pattern.n
    chosen: list[int] = []

    def extend(i: int, used: int) -> Iterator[tuple[int, ...]]:
        if i == k:
            yield tuple(chosen)
            return
        cand = host.full & ~used
        for j, h in enumerate(chosen):
            cand &= host.out[h] if pattern.edge(j, i) else host.inn[h]
            if not cand:
                return
        while cand:
            low = cand & -cand
            cand ^= low
            chosen.append(low.bit_length() - 1)
            yield from extend(i + 1, used | low)
            chosen.pop()

    yield from extend(0, 0)


def find_embedding(host: Tournament, pattern: Tournament) -> Embedding | None:
    """First embedding of ``pattern`` as a subtournament of ``host`` (lexicographic in the map).

    None means the host is pattern-free.
    """
    if pattern.n > CANON_MAX_N:
        raise TournamentError(f"patterns are limited to {CANON_MAX_N} vertices")
    if pattern.n > host.n:
        return None
    for m in _embeddings(host, pattern):
        return Embedding(pattern, host, m)
    return None


def contains(host: Tournament, pattern: Tournament) -> bool:
    return find_embedding(host, pattern) is not None


def orbit_count(n: int) -> int:
    """Number of labeled tournaments on ``n`` vertices."""
    return 1 << pair_count(n)


def automorphism_count(T: Tournament) -> int:
    return sum(1 for _ in _embeddings(T, T))


def labeled_count_check(classes: Sequence[str], n: int) -> bool:
    """Orbit-stabiliser: the class orbits must exactly tile the labeled space."""
    total = sum(math.factorial(n) // automorphism_count(Tournament.from_bits(n, b)) for b in classes)
    return total == orbit_count(n)
