"""Regularity tools: epsilon-criticality, (c, lambda, w)-structures, smooth
refinement, backward matchings and transitive merging.

All decisions use exact integer arithmetic; ``c``, ``lambda`` and ``epsilon``
are :class:`fractions.Fraction` values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Iterator, Sequence

import numpy as np

from .core import (
    TR_EXACT_MAX,
    Ordering,
    Tournament,
    TournamentError,
    VertexSet,
    greedy_transitive,
    is_transitive_mask,
    mask_of,
    members,
    popcount,
    tr_upper_bound,
)

CRITICAL_MAX_N = 20


def as_fraction(x: Fraction | int | str) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


# threshold formulas ---------------------------------------------------------


def epsilon_thresholds(c: Fraction | float, f: Fraction | float, N: int) -> tuple[float, float, float]:
    """``(log_c(1-f), log_{c/2}(1/2), log_N(2))``.

    Upper limits on epsilon for the merge step, the matching step and the
    minimum size of a critical tournament.
    Floating point; compare with a tolerance of 1e-12.
    """
    c, f = float(c), float(f)
    if not 0 < c < 1:
        raise ValueError("c must lie strictly between 0 and 1")
    if not 0 < f < 1:
        raise ValueError("f must lie strictly between 0 and 1")
    if N < 2:
        raise ValueError("N must be at least 2")
    return math.log(1 - f) / math.log(c), math.log(0.5) / math.log(c / 2), math.log(2) / math.log(N)


# epsilon-criticality --------------------------------------------------------


def _at_least_power(t: int, s: int, eps: Fraction) -> bool:
    """``t >= s ** eps`` for a positive rational ``eps = p/q``, exactly."""
    return t ** eps.denominator >= s ** eps.numerator


def tr_all_subsets(T: Tournament) -> np.ndarray:
    """``tr`` of every vertex subset, indexed by bitmask (n <= 20).

    Fills the table by popcount layers: a subset's value only depends on
    ``S & out(v)``, which is strictly smaller.
    """
    n = T.n
    if n > CRITICAL_MAX_N:
        raise TournamentError(f"full subset table is limited to n <= {CRITICAL_MAX_N}")
    size = 1 << n
    masks = np.arange(size, dtype=np.int64)
    pc = np.zeros(size, dtype=np.int8)
    for v in range(n):
        pc += ((masks >> v) & 1).astype(np.int8)
    table = np.zeros(size, dtype=np.int8)
    layers = [masks[pc == k] for k in range(n + 1)]
    for k in range(1, n + 1):
        layer = layers[k]
        best = np.zeros(len(layer), dtype=np.int8)
        for v in range(n):
            has = ((layer >> v) & 1).astype(bool)
            sub = layer[has] & T.out[v]
            best[has] = np.maximum(best[has], table[sub] + 1)
        table[layer] = best
    return table


def is_epsilon_critical(T: Tournament, eps: Fraction | str) -> tuple[bool, VertexSet | None]:
    """True iff tr(T) < n^eps and tr(S) >= |S|^eps for every proper nonempty S.

    When false, the returned set is a witness: the whole vertex set if the
    first condition fails, else the first proper subset (by bitmask) that
    violates the second.
    """
    eps = as_fraction(eps)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    n = T.n
    table = tr_all_subsets(T)
    if _at_least_power(int(table[-1]), n, eps):
        return False, frozenset(range(n))
    ok = np.zeros((n + 1, n + 1), dtype=bool)
    for t in range(n + 1):
        for s in range(n + 1):
            ok[t, s] = _at_least_power(t, s, eps)
    masks = np.arange(1 << n, dtype=np.int64)
    sizes = np.zeros(1 << n, dtype=np.int64)
    for v in range(n):
        sizes += (masks >> v) & 1
    good = ok[table.astype(np.int64), sizes]
    good[0] = True
    good[-1] = True
    bad = np.flatnonzero(~good)
    if len(bad):
        return False, frozenset(members(int(bad[0])))
    return True, None


# structures ------------------------------------------------------------------


@dataclass(frozen=True)
class StructureSpec:
    w: tuple[int, ...]
    c: Fraction
    lam: Fraction

    def __post_init__(self) -> None:
        if not self.w or any(x not in (0, 1) for x in self.w):
            raise ValueError("w must be a nonempty 0/1 vector")
        if self.c <= 0:
            raise ValueError("c must be positive")
        if not 0 < self.lam < 1:
            raise ValueError("lambda must lie strictly between 0 and 1")


@dataclass(frozen=True)
class ChainStructure:
    sets: tuple[VertexSet, ...]
    spec: StructureSpec

    def __post_init__(self) -> None:
        if len(self.sets) != len(self.spec.w):
            raise ValueError("one set per entry of w")

    @property
    def k(self) -> int:
        return len(self.sets)

    def to_json(self) -> dict[str, Any]:
        return {
            "w": list(self.spec.w),
            "c": str(self.spec.c),
            "lambda": str(self.spec.lam),
            "sets": [sorted(v + 1 for v in s) for s in self.sets],
        }

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> ChainStructure:
        spec = StructureSpec(tuple(int(x) for x in obj["w"]), Fraction(obj["c"]), Fraction(obj["lambda"]))
        return cls(tuple(frozenset(v - 1 for v in s) for s in obj["sets"]), spec)


class StructureError(ValueError):
    """A chain structure that is malformed for its host (overlap, out of range)."""


def _check_sets(T: Tournament, sets: Sequence[Iterable[int]]) -> list[int]:
    masks = []
    seen = 0
    for s in sets:
        m = mask_of(s)
        if m & ~T.full:
            raise StructureError("set contains a vertex outside the tournament")
        if m & seen:
            raise StructureError("sets overlap")
        seen |= m
        masks.append(m)
    return masks


def verify_structure(
    T: Tournament,
    chain: ChainStructure,
    smooth: bool = False,
    tr_bound: int | None = None,
) -> tuple[bool, str | None]:
    """Check the (c, lambda, w)-structure conditions, and smoothness if asked.

    The transitive-set size condition needs tr(T); it is exact for n <= 24
    and otherwise an upper bound (``tr_bound`` or a triangle-packing bound)
    is used, which keeps a pass sound.  Returns ``(ok, first violation)``.
    """
    masks = _check_sets(T, chain.sets)
    c, lam = chain.spec.c, chain.spec.lam
    n = T.n
    tr_T = None
    for i, (m, wi) in enumerate(zip(masks, chain.spec.w)):
        size = popcount(m)
        if wi == 0:
            if size < c * n:
                return False, f"set {i + 1}: linear set has {size} < c*n = {c * n} vertices"
        else:
            if not is_transitive_mask(T, m):
                return False, f"set {i + 1}: not transitive"
            if tr_T is None:
                tr_T = tr_bound if tr_bound is not None else tr_upper_bound(T)
            if size < c * tr_T:
                return False, f"set {i + 1}: transitive set has {size} < c*tr = {c * tr_T} vertices"
    p, q = lam.numerator, lam.denominator
    out = T.out
    for i in range(len(masks)):
        for j in range(i + 1, len(masks)):
            a, b = masks[i], masks[j]
            na, nb = popcount(a), popcount(b)
            fwd = sum(popcount(out[x] & b) for x in members(a))
            # d(A, B) >= 1 - lambda  <=>  fwd * q >= (q - p) * |A||B|
            if fwd * q < (q - p) * na * nb:
                return False, f"sets {i + 1},{j + 1}: density {Fraction(fwd, na * nb)} < 1 - lambda"
            if not smooth:
                continue
            for x in members(a):
                if popcount(out[x] & b) * q < (q - p) * nb:
                    return False, f"vertex v{x + 1} of set {i + 1}: d({{v}}, S_{j + 1}) < 1 - lambda"
            inn = T.inn
            for y in members(b):
                if popcount(inn[y] & a) * q < (q - p) * na:
                    return False, f"vertex v{y + 1} of set {j + 1}: d(S_{i + 1}, {{v}}) < 1 - lambda"
    return True, None


def bad_vertices(T: Tournament, chain: ChainStructure, M: int) -> list[VertexSet]:
    """For each set ``A_i``, the union over ``j != i`` of ``Bad^M(i, j)``.

    ``v in A_i`` is bad against ``A_j`` when more than ``M * lambda * |A_j|``
    vertices of ``A_j`` send it a backward arc (strict; ties are kept).
    """
    masks = _check_sets(T, chain.sets)
    p, q = chain.spec.lam.numerator, chain.spec.lam.denominator
    result = []
    for i, a in enumerate(masks):
        bad = 0
        for j, b in enumerate(masks):
            if j == i:
                continue
            limit_num = M * p * popcount(b)  # threshold * q
            back = T.inn if i < j else T.out
            for v in members(a):
                if popcount(back[v] & b) * q > limit_num:
                    bad |= 1 << v
        result.append(frozenset(members(bad)))
    return result


def smooth_refine(T: Tournament, chain: ChainStructure) -> ChainStructure:
    """Drop every Bad^M vertex with ``M = 2k``.

    Each set keeps at least half its vertices, and the result is a smooth
    structure with ``c/2`` and ``4 k lambda``.
    """
    ok, why = verify_structure(T, chain)
    if not ok:
        raise StructureError(f"input is not a structure: {why}")
    k = chain.k
    M = 2 * k
    bad = bad_vertices(T, chain, M)
    sets = tuple(s - b for s, b in zip(chain.sets, bad))
    lam = chain.spec.lam * 2 * M
    if lam >= 1:
        raise StructureError(f"refined lambda {lam} is not below 1; need lambda0 < 1/(4k)")
    spec = StructureSpec(chain.spec.w, chain.spec.c / 2, lam)
    return ChainStructure(sets, spec)


# matchings ------------------------------------------------------------------


@dataclass(frozen=True)
class MatchingOutcome:
    """Result of :func:`backward_matching`.

    ``pairs`` is a maximum matching of backward arcs ``y -> x``.  When it has
    fewer than ``m`` pairs, ``cover`` is a minimum vertex cover and
    ``complete_pair`` is ``(X - C, Y - C)`` with the first complete to the
    second.
    """

    m: int
    pairs: tuple[tuple[int, int], ...]
    cover: VertexSet | None = None
    complete_pair: tuple[VertexSet, VertexSet] | None = None

    @property
    def is_matching(self) -> bool:
        return len(self.pairs) >= self.m


def max_bipartite_matching(xs: Sequence[int], adj: dict[int, list[int]]) -> dict[int, int]:
    """Maximum matching by augmenting paths; returns ``{x: y}``.

    ``adj[x]`` lists the right-side neighbours of ``x`` in the order tried.
    """
    match_y: dict[int, int] = {}

    def augment(x: int, seen: set[int]) -> bool:
        for y in adj[x]:
            if y in seen:
                continue
            seen.add(y)
            if y not in match_y or augment(match_y[y], seen):
                match_y[y] = x
                return True
        return False

    for x in xs:
        augment(x, set())
    return {x: y for y, x in match_y.items()}


def konig_cover(xs: Sequence[int], adj: dict[int, list[int]], match: dict[int, int]) -> tuple[set[int], set[int]]:
    """Minimum vertex cover ``(C_X, C_Y)`` from a maximum matching.

    ``Z`` = vertices reachable from unmatched left vertices by alternating
    paths; the cover is ``(X - Z) | (Y & Z)``.
    """
    match_y = {y: x for x, y in match.items()}
    zx = {x for x in xs if x not in match}
    zy: set[int] = set()
    stack = list(zx)
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y in zy:
                continue
            zy.add(y)
            x2 = match_y.get(y)
            if x2 is not None and x2 not in zx:
                zx.add(x2)
                stack.append(x2)
    return set(xs) - zx, zy


def backward_matching(T: Tournament, X: Iterable[int], Y: Iterable[int], m: int) -> MatchingOutcome:
    """Pairs ``(x_i, y_i)`` with arcs ``y_i -> x_i`` (X precedes Y), or a complete pair.

    The bipartite graph joins x and y when the arc goes y -> x.  With a
    matching of size >= m all matched pairs are returned (sorted by x).
    Otherwise the Konig cover ``C`` gives ``X - C_X`` complete to ``Y - C_Y``;
    sizes are reported as they are, whatever regime the inputs are in.
    """
    xs, ys = sorted(set(X)), sorted(set(Y))
    if set(xs) & set(ys):
        raise ValueError("X and Y must be disjoint")
    if m <= 0:
        raise ValueError("m must be positive")
    ym = mask_of(ys)
    adj = {x: members(T.inn[x] & ym) for x in xs}
    match = max_bipartite_matching(xs, adj)
    pairs = tuple(sorted(match.items()))
    if len(pairs) >= m:
        return MatchingOutcome(m, pairs)
    cx, cy = konig_cover(xs, adj, match)
    return MatchingOutcome(
        m,
        pairs,
        frozenset(cx | cy),
        (frozenset(set(xs) - cx), frozenset(set(ys) - cy)),
    )


# merging ----------------------------------------------------------------------


def is_complete_to(T: Tournament, A: Iterable[int], B: Iterable[int]) -> bool:
    bm = mask_of(B)
    return all(T.out[a] & bm == bm for a in A)


def merge_transitive(T: Tournament, bulk_witness: Iterable[int], G: Iterable[int]) -> Ordering:
    """Union of two transitive sets, one complete to the other, in transitive order."""
    A, B = set(bulk_witness), set(G)
    if A & B:
        raise StructureError("sets overlap")
    for s in (A, B):
        if not is_transitive_mask(T, mask_of(s)):
            raise StructureError("merge input is not transitive")
    if is_complete_to(T, A, B):
        first, second = A, B
    elif is_complete_to(T, B, A):
        first, second = B, A
    else:
        raise StructureError("neither set is complete to the other")
    return T.transitive_order(first) + T.transitive_order(second)


BULK_TO_TRANSITIVE = "bulk->transitive"
TRANSITIVE_TO_BULK = "transitive->bulk"


@dataclass(frozen=True)
class MergeCertificate:
    """A transitive set and a bulk set with one complete to the other.

    ``bulk_witness`` is a largest transitive subset of ``bulk`` when
    ``|bulk| <= 24`` (otherwise a greedy one), so ``claimed_gain`` is
    ``tr(bulk) + |transitive_part|`` in the exact regime.
    """

    transitive_part: Ordering
    bulk: VertexSet
    bulk_witness: Ordering
    direction: str
    claimed_gain: int

    def to_json(self) -> dict[str, Any]:
        return {
            "transitive_part": [v + 1 for v in self.transitive_part],
            "bulk": sorted(v + 1 for v in self.bulk),
            "bulk_witness": [v + 1 for v in self.bulk_witness],
            "direction": self.direction,
            "claimed_gain": self.claimed_gain,
        }

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> MergeCertificate:
        return cls(
            tuple(v - 1 for v in obj["transitive_part"]),
            frozenset(v - 1 for v in obj["bulk"]),
            tuple(v - 1 for v in obj["bulk_witness"]),
            obj["direction"],
            int(obj["claimed_gain"]),
        )


def best_transitive(T: Tournament, S: Iterable[int]) -> Ordering:
    """Largest transitive subset of ``S`` in order (greedy beyond 24 vertices)."""
    s = set(S)
    if len(s) <= TR_EXACT_MAX:
        return T.tr_table.witness(mask_of(s))
    return greedy_transitive(T, s)


def make_merge_certificate(T: Tournament, bulk: Iterable[int], transitive_part: Iterable[int]) -> MergeCertificate:
    """Certificate for a bulk set complete to/from a transitive set."""
    bulk = frozenset(bulk)
    G = T.transitive_order(transitive_part)
    if is_complete_to(T, bulk, G):
        direction = BULK_TO_TRANSITIVE
    elif is_complete_to(T, G, bulk):
        direction = TRANSITIVE_TO_BULK
    else:
        raise StructureError("bulk is neither complete to nor from the transitive part")
    w = best_transitive(T, bulk)
    return MergeCertificate(G, bulk, w, direction, len(w) + len(G))


def verify_merge(T: Tournament, cert: MergeCertificate) -> tuple[bool, str]:
    """Re-check a merge certificate edge by edge."""
    G, bulk, w = cert.transitive_part, cert.bulk, cert.bulk_witness
    if not G or not bulk:
        return False, "empty side"
    if set(G) & bulk:
        return False, "transitive part overlaps the bulk"
    if not is_transitive_mask(T, mask_of(G)):
        return False, "transitive part is not transitive"
    if not set(w) <= bulk:
        return False, "bulk witness is not inside the bulk"
    if not is_transitive_mask(T, mask_of(w)):
        return False, "bulk witness is not transitive"
    if cert.direction == BULK_TO_TRANSITIVE:
        if not is_complete_to(T, bulk, G):
            return False, "bulk is not complete to the transitive part"
    elif cert.direction == TRANSITIVE_TO_BULK:
        if not is_complete_to(T, G, bulk):
            return False, "transitive part is not complete to the bulk"
    else:
        return False, f"unknown direction {cert.direction!r}"
    merged = merge_transitive(T, w, G)
    if len(merged) != cert.claimed_gain or not is_transitive_mask(T, mask_of(merged)):
        return False, "merged set does not reach the claimed size"
    if len(bulk) <= TR_EXACT_MAX and T.tr_table.size(mask_of(bulk)) != len(w):
        return False, "bulk witness is not a largest transitive subset"
    return True, ""


# structure search ---------------------------------------------------------------


def _improve_order(T: Tournament, order: list[int]) -> list[int]:
    """Move single vertices to the slot with fewest backward arcs, until stable."""
    order = list(order)
    improved = True
    while improved:
        improved = False
        for v in list(order):
            rest = [u for u in order if u != v]
            here = order.index(v)
            # v in front: every inneighbour of v sits after it
            cost = best = popcount(T.inn[v])
            best_at = 0
            cur = cost if here == 0 else None
            for i, u in enumerate(rest, start=1):
                cost += -1 if T.edge(u, v) else 1
                if i == here:
                    cur = cost
                if cost < best:
                    best, best_at = cost, i
            if best < cur:
                rest.insert(best_at, v)
                order = rest
                improved = True
    return order


def find_structure(T: Tournament, spec: StructureSpec, budget: int = 20000) -> ChainStructure | None:
    """Heuristic search for a (c, lambda, w)-structure; None proves nothing.

    Vertices are ordered by outdegree (highest first), then single vertices
    are moved to slots with fewer backward arcs.  The order is cut into
    consecutive blocks by depth-first search over block boundaries: linear
    blocks take at least ``ceil(c n)`` vertices, transitive blocks a
    transitive run of at least ``c tr(T)`` (an upper bound on tr beyond 24
    vertices), and each new block must already meet the density bound
    against the earlier ones.  ``budget`` caps the number of blocks tried.
    Unused vertices are then added wherever verification still passes.
    """
    n = T.n
    if spec.c > 1:
        return None
    order = sorted(range(n), key=lambda v: (-T.outdegree(v), v))
    order = _improve_order(T, order)
    tr_T = tr_upper_bound(T)
    need_lin = max(1, math.ceil(spec.c * n))
    need_tr = max(1, math.ceil(spec.c * tr_T))
    w = spec.w
    k = len(w)
    p, q = spec.lam.numerator, spec.lam.denominator
    min_rest = [0] * (k + 1)
    for i in range(k - 1, -1, -1):
        min_rest[i] = min_rest[i + 1] + (need_lin if w[i] == 0 else need_tr)
    tries = 0

    def dense(prev: list[int], m: int) -> bool:
        nb = popcount(m)
        for a in prev:
            fwd = sum(popcount(T.out[x] & m) for x in members(a))
            if fwd * q < (q - p) * popcount(a) * nb:
                return False
        return True

    def blocks(pos: int, i: int) -> Iterator[list[int]]:
        if w[i] == 0:
            for end in range(pos + need_lin, n - min_rest[i + 1] + 1):
                yield order[pos:end]
            return
        run: list[int] = []
        m = 0
        for v in order[pos:]:
            if not is_transitive_mask(T, m | (1 << v)):
                break
            run.append(v)
            m |= 1 << v
        for size in range(len(run), need_tr - 1, -1):
            yield run[:size]

    def search(pos: int, i: int, prev: list[int]) -> list[int] | None:
        nonlocal tries
        if i == k:
            chain = ChainStructure(tuple(frozenset(members(m)) for m in prev), spec)
            return prev if verify_structure(T, chain, tr_bound=tr_T)[0] else None
        for blk in blocks(pos, i):
            tries += 1
            if tries > budget:
                return None
            m = mask_of(blk)
            if dense(prev, m):
                found = search(pos + len(blk), i + 1, prev + [m])
                if found is not None:
                    return found
        return None

    for start in range(0, n - min_rest[0] + 1):
        found = search(start, 0, [])
        if found is not None:
            chain = ChainStructure(tuple(frozenset(members(m)) for m in found), spec)
            return _grow(T, chain, order, tr_T)
        if tries > budget:
            break
    return None


def _grow(T: Tournament, chain: ChainStructure, order: list[int], tr_T: int) -> ChainStructure:
    """Add unused vertices to sets while the structure still verifies."""
    used = set().union(*chain.sets)
    sets = [set(s) for s in chain.sets]
    for v in order:
        if v in used:
            continue
        for i, wi in enumerate(chain.spec.w):
            trial = [set(s) for s in sets]
            trial[i].add(v)
            cand = ChainStructure(tuple(frozenset(s) for s in trial), chain.spec)
            if verify_structure(T, cand, tr_bound=tr_T)[0]:
                sets = trial
                used.add(v)
                break
    return ChainStructure(tuple(frozenset(s) for s in sets), chain.spec)
