"""Homogeneous sets, star decompositions, galaxy/forest orderings and the
five-outcome classification of six-vertex tournaments."""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import permutations
from typing import Any, Iterable, Sequence

from .core import (
    Ordering,
    Tournament,
    TournamentError,
    VertexSet,
    backward_graph,
    check_ordering,
    induced,
    mask_of,
    members,
    named,
    popcount,
    reverse,
)
from .enumeration import canonical_form, enumerate_classes, is_isomorphic

ORDERING_SEARCH_MAX_N = 8

# outcome (4): positions a..f = 0..5, backward arcs (f,a), (e,a), (d,b), (f,c)
OUTCOME4_ARCS = frozenset({(5, 0), (4, 0), (3, 1), (5, 2)})


# homogeneous sets -------------------------------------------------------------


def is_homogeneous(T: Tournament, S: Iterable[int]) -> bool:
    s = mask_of(S)
    for v in members(T.full & ~s):
        if T.out[v] & s and T.inn[v] & s:
            return False
    return True


def _closure(T: Tournament, s: int) -> int:
    """Smallest homogeneous set containing ``s``: keep absorbing splitters."""
    changed = True
    while changed:
        changed = False
        for v in members(T.full & ~s):
            if T.out[v] & s and T.inn[v] & s:
                s |= 1 << v
                changed = True
    return s


def find_homogeneous(T: Tournament) -> VertexSet | None:
    """First nontrivial homogeneous set by (size, sorted vertex tuple); None iff prime.

    Every minimum-size nontrivial homogeneous set is the closure of any pair
    inside it, so scanning pair closures finds the same first set as scanning
    all subsets by size.
    """
    best: tuple[int, tuple[int, ...]] | None = None
    for a in range(T.n):
        for b in range(a + 1, T.n):
            s = _closure(T, (1 << a) | (1 << b))
            if s == T.full:
                continue
            key = (popcount(s), tuple(members(s)))
            if best is None or key < best:
                best = key
    return None if best is None else frozenset(best[1])


def is_prime(T: Tournament) -> bool:
    return find_homogeneous(T) is None


# star decompositions ------------------------------------------------------------

SINGLETON, LEFT, RIGHT, STAR, OTHER = "singleton", "left-star", "right-star", "star", "other"


@dataclass(frozen=True)
class Component:
    kind: str
    vertices: tuple[int, ...]  # in position order
    center: int | None = None
    leaves: tuple[int, ...] = ()


@dataclass(frozen=True)
class StarDecomposition:
    ordering: Ordering
    components: tuple[Component, ...]
    is_star_ordering: bool
    is_galaxy_ordering: bool
    is_forest_ordering: bool


def _components(n: int, arcs: Iterable[tuple[int, int]]) -> tuple[list[list[int]], dict[int, set[int]], bool]:
    adj: dict[int, set[int]] = {v: set() for v in range(n)}
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    acyclic = True
    for a, b in arcs:
        adj[a].add(b)
        adj[b].add(a)
        ra, rb = find(a), find(b)
        if ra == rb:
            acyclic = False
        else:
            parent[ra] = rb
    groups: dict[int, list[int]] = {}
    for v in range(n):
        groups.setdefault(find(v), []).append(v)
    return list(groups.values()), adj, acyclic


def analyze_ordering(T: Tournament, order: Sequence[int]) -> StarDecomposition:
    """Split the backward-arc graph of ``order`` into components and classify them.

    A one-edge component may take either endpoint as its center; the
    earlier endpoint (left star) is preferred unless only the right-star
    reading satisfies the betweenness condition.
    """
    check_ordering(T, order)
    order = tuple(order)
    pos = {v: i for i, v in enumerate(order)}
    bg = backward_graph(T, order)
    groups, adj, acyclic = _components(T.n, bg.arcs)

    comps: list[Component] = []
    pairs: list[tuple[int, int]] = []  # one-edge stars, (earlier, later)
    for g in groups:
        vs = tuple(sorted(g, key=pos.__getitem__))
        if len(vs) == 1:
            comps.append(Component(SINGLETON, vs))
            continue
        edges = sum(len(adj[v]) for v in vs) // 2
        if len(vs) == 2:
            pairs.append((vs[0], vs[1]))
            comps.append(Component(LEFT, vs, vs[0], (vs[1],)))
            continue
        hub = [v for v in vs if len(adj[v]) == len(vs) - 1]
        if edges != len(vs) - 1 or not hub:
            comps.append(Component(OTHER, vs))
            continue
        c = hub[0]
        leaves = tuple(v for v in vs if v != c)
        if all(pos[c] < pos[x] for x in leaves):
            kind = LEFT
        elif all(pos[c] > pos[x] for x in leaves):
            kind = RIGHT
        else:
            kind = STAR
        comps.append(Component(kind, vs, c, leaves))

    is_star = all(c.kind != OTHER for c in comps)
    galaxy = is_star and all(c.kind != STAR for c in comps)
    if galaxy:
        # open position intervals spanned by the leaves of stars with >= 2 leaves
        spans = [
            (id(c), min(pos[x] for x in c.leaves), max(pos[x] for x in c.leaves))
            for c in comps
            if len(c.leaves) >= 2
        ]

        def inside(v: int, own: int) -> bool:
            return any(lo < pos[v] < hi for key, lo, hi in spans if key != own)

        fixed = []
        for c in comps:
            if len(c.leaves) >= 2:
                if inside(c.center, id(c)):
                    galaxy = False
                fixed.append(c)
            elif len(c.leaves) == 1:
                a, b = c.vertices
                if not inside(a, id(c)):
                    fixed.append(c)
                elif not inside(b, id(c)):
                    fixed.append(Component(RIGHT, c.vertices, b, (a,)))
                else:
                    galaxy = False
                    fixed.append(c)
            else:
                fixed.append(c)
        comps = fixed

    comps.sort(key=lambda c: pos[c.vertices[0]])
    return StarDecomposition(order, tuple(comps), is_star, galaxy, acyclic)


def _prefix_viable(T: Tournament, prefix: Sequence[int]) -> bool:
    """Can some completion of ``prefix`` still be a galaxy ordering?"""
    pos = {v: i for i, v in enumerate(prefix)}
    arcs = []
    placed = 0
    for v in prefix:
        for w in members(T.out[v] & placed):
            arcs.append((pos[v], pos[w]))
        placed |= 1 << v
    groups, adj, acyclic = _components(len(prefix), arcs)
    if not acyclic:
        return False
    spans = []
    centers = []
    for g in groups:
        if len(g) < 3:
            continue
        hub = [p for p in g if len(adj[p]) == len(g) - 1]
        if not hub:
            return False
        c = hub[0]
        leaves = [p for p in g if p != c]
        if min(leaves) < c < max(leaves):
            return False
        spans.append((c, min(leaves), max(leaves)))
        centers.append(c)
    for c in centers:
        if any(lo < c < hi for cc, lo, hi in spans if cc != c):
            return False
    return True


def find_galaxy_ordering(T: Tournament) -> Ordering | None:
    """First galaxy ordering in lexicographic order, or None if T is not a galaxy."""
    if T.n > ORDERING_SEARCH_MAX_N:
        raise TournamentError(f"ordering search is limited to n <= {ORDERING_SEARCH_MAX_N}")
    prefix: list[int] = []

    def dfs(used: int) -> Ordering | None:
        if len(prefix) == T.n:
            order = tuple(prefix)
            return order if analyze_ordering(T, order).is_galaxy_ordering else None
        for v in range(T.n):
            if (used >> v) & 1:
                continue
            prefix.append(v)
            if _prefix_viable(T, prefix):
                hit = dfs(used | (1 << v))
                if hit is not None:
                    return hit
            prefix.pop()
        return None

    return dfs(0)


def is_galaxy(T: Tournament) -> bool:
    return find_galaxy_ordering(T) is not None


def forest_orderings(T: Tournament) -> list[Ordering]:
    """All orderings whose backward-arc graph is acyclic, in lexicographic order."""
    if T.n > ORDERING_SEARCH_MAX_N:
        raise TournamentError(f"ordering search is limited to n <= {ORDERING_SEARCH_MAX_N}")
    found: list[Ordering] = []
    prefix: list[int] = []
    # comp[v] is the component id of placed vertex v
    comp = [-1] * T.n

    def dfs(used: int) -> None:
        if len(prefix) == T.n:
            found.append(tuple(prefix))
            return
        for v in range(T.n):
            if (used >> v) & 1:
                continue
            hit = members(T.out[v] & used)
            ids = {comp[w] for w in hit}
            if len(ids) < len(hit):
                continue  # two backward arcs into one component close a cycle
            saved = comp[:]
            new_id = v
            for w in range(T.n):
                if comp[w] in ids and (used >> w) & 1:
                    comp[w] = new_id
            comp[v] = new_id
            prefix.append(v)
            dfs(used | (1 << v))
            prefix.pop()
            comp[:] = saved

    dfs(0)
    return found


def count_forest_orderings(T: Tournament) -> tuple[int, list[Ordering]]:
    found = forest_orderings(T)
    return len(found), found


# six-vertex classification ---------------------------------------------------------


@dataclass(frozen=True)
class ClassificationRecord:
    bits: str  # canonical form of the class
    outcomes: tuple[int, ...]
    witnesses: dict[int, dict[str, Any]] = field(hash=False, compare=False)

    def to_json(self) -> dict[str, Any]:
        return {
            "n": 6,
            "bits": self.bits,
            "outcomes": list(self.outcomes),
            "witnesses": {str(k): v for k, v in sorted(self.witnesses.items())},
        }


def _one_based(vs: Iterable[int]) -> list[int]:
    return [v + 1 for v in vs]


def _outcome2(T: Tournament, C5: Tournament) -> dict[str, Any] | None:
    for v in range(T.n):
        rest = T.full & ~(1 << v)
        sub, labels = induced(T, members(rest))
        ok, f = is_isomorphic(sub, C5)
        if not ok:
            continue
        d_out, d_in = T.outdegree(v, rest), T.indegree(v, rest)
        if d_in == 1 or d_out == 1:
            return {
                "vertex": v + 1,
                "degree": "out" if d_out == 1 else "in",
                # C5 vertex (1-based) -> host vertex (1-based)
                "c5_map": _one_based(labels[f.index(i)] for i in range(5)),
            }
    return None


def _outcome4(T: Tournament) -> dict[str, Any] | None:
    for side, H in (("T", T), ("Tc", reverse(T))):
        for order in permutations(range(6)):
            if backward_graph(H, order).position_arcs() == OUTCOME4_ARCS:
                return {"side": side, "ordering": _one_based(order)}
    return None


def classify6(T: Tournament) -> ClassificationRecord:
    """Every outcome of the six-vertex classification that holds for ``T``, with witnesses.

    Outcomes: (1) galaxy, (2) a vertex whose deletion leaves C5 and which has
    exactly one in- or outneighbour there, (3) not prime, (4) an ordering of T
    or T^c with backward arcs (f,a), (e,a), (d,b), (f,c), (5) isomorphic to K6.
    """
    if T.n != 6:
        raise TournamentError("classify6 needs a six-vertex tournament")
    witnesses: dict[int, dict[str, Any]] = {}
    g = find_galaxy_ordering(T)
    if g is not None:
        witnesses[1] = {"ordering": _one_based(g)}
    w2 = _outcome2(T, named("C5"))
    if w2 is not None:
        witnesses[2] = w2
    h = find_homogeneous(T)
    if h is not None:
        witnesses[3] = {"set": _one_based(sorted(h))}
    w4 = _outcome4(T)
    if w4 is not None:
        witnesses[4] = w4
    ok, f = is_isomorphic(T, named("K6"))
    if ok:
        witnesses[5] = {"map": _one_based(f)}
    return ClassificationRecord(canonical_form(T), tuple(sorted(witnesses)), witnesses)


def check_record(T: Tournament, rec: ClassificationRecord) -> tuple[bool, str]:
    """Re-check every witness of a record directly from its definition."""
    if canonical_form(T) != rec.bits:
        return False, "record does not describe this tournament"
    C5, K6 = named("C5"), named("K6")
    for k in rec.outcomes:
        w = rec.witnesses[k]
        if k == 1:
            order = tuple(v - 1 for v in w["ordering"])
            if not analyze_ordering(T, order).is_galaxy_ordering:
                return False, "outcome 1 witness is not a galaxy ordering"
        elif k == 2:
            v = w["vertex"] - 1
            image = [x - 1 for x in w["c5_map"]]
            if v in image or len(set(image)) != 5:
                return False, "outcome 2 map is not a bijection onto V - v"
            for a in range(5):
                for b in range(5):
                    if a != b and C5.edge(a, b) != T.edge(image[a], image[b]):
                        return False, "outcome 2 map is not an isomorphism onto C5"
            rest = T.full & ~(1 << v)
            deg = T.outdegree(v, rest) if w["degree"] == "out" else T.indegree(v, rest)
            if deg != 1:
                return False, "outcome 2 vertex degree is not 1"
        elif k == 3:
            s = [x - 1 for x in w["set"]]
            if not 1 < len(s) < T.n or not is_homogeneous(T, s):
                return False, "outcome 3 set is not a nontrivial homogeneous set"
        elif k == 4:
            H = T if w["side"] == "T" else reverse(T)
            order = tuple(v - 1 for v in w["ordering"])
            if backward_graph(H, order).position_arcs() != OUTCOME4_ARCS:
                return False, "outcome 4 ordering has the wrong backward arcs"
        elif k == 5:
            f = [x - 1 for x in w["map"]]
            if sorted(f) != list(range(6)) or any(
                T.edge(a, b) != K6.edge(f[a], f[b]) for a in range(6) for b in range(6) if a != b
            ):
                return False, "outcome 5 map is not an isomorphism onto K6"
    return True, ""


def _classify_bits(bits: str) -> ClassificationRecord:
    return classify6(Tournament.from_bits(6, bits))


def classify_all(jobs: int = 1) -> list[ClassificationRecord]:
    """Classification records for all 56 six-vertex classes in canonical order."""
    classes = enumerate_classes(6)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_classify_bits, classes))
    return [_classify_bits(b) for b in classes]


def records_jsonl(records: Sequence[ClassificationRecord]) -> str:
    return "".join(json.dumps(r.to_json(), sort_keys=True) + "\n" for r in records)


def record_from_json(obj: dict[str, Any]) -> ClassificationRecord:
    return ClassificationRecord(
        obj["bits"],
        tuple(obj["outcomes"]),
        {int(k): v for k, v in obj["witnesses"].items()},
    )
