"""Shared brute-force oracles and hypothesis strategies.

The oracles here work on plain arc sets and share no code with the package,
so agreement between the two is meaningful.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction
from itertools import combinations, permutations, product

from hypothesis import strategies as st

from ehtour.core import Tournament, pair_count
from ehtour.regularity import ChainStructure, StructureSpec

ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)


def arcs_of(n: int, bits: str) -> set[tuple[int, int]]:
    arcs = set()
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            arcs.add((i, j) if bits[k] == "1" else (j, i))
            k += 1
    return arcs


def arc_set(T: Tournament) -> set[tuple[int, int]]:
    return arcs_of(T.n, T.bits)


def brute_transitive(S, arcs) -> bool:
    S = list(S)
    scores = sorted(sum((a, b) in arcs for b in S if b != a) for a in S)
    return scores == list(range(len(S)))


def brute_tr(S, arcs) -> int:
    S = list(S)
    for k in range(len(S), 0, -1):
        for sub in combinations(S, k):
            if brute_transitive(sub, arcs):
                return k
    return 0


def brute_canon(n: int, arcs) -> str:
    best = None
    for p in permutations(range(n)):
        s = "".join("1" if (p[i], p[j]) in arcs else "0" for i in range(n) for j in range(i + 1, n))
        if best is None or s < best:
            best = s
    return best


def brute_contains(host_n: int, host_arcs, pat_n: int, pat_arcs) -> bool:
    for S in combinations(range(host_n), pat_n):
        for img in permutations(S):
            if all((img[a], img[b]) in host_arcs for a, b in pat_arcs):
                return True
    return False


def brute_homogeneous_exists(n: int, arcs) -> bool:
    for k in range(2, n):
        for S in combinations(range(n), k):
            if all(
                all((v, s) in arcs for s in S) or all((s, v) in arcs for s in S) for v in range(n) if v not in S
            ):
                return True
    return False


def backward_position_arcs(order, arcs) -> list[tuple[int, int]]:
    pos = {v: i for i, v in enumerate(order)}
    return sorted((pos[a], pos[b]) for a, b in arcs if pos[a] > pos[b])


def is_forest(n: int, edges) -> bool:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra == rb:
            return False
        parent[ra] = rb
    return True


def brute_galaxy_ordering(n: int, pos_arcs) -> bool:
    """Galaxy test straight from the definition, on position arcs.

    Components of the backward graph must be singletons or stars whose
    centre is left of all its leaves or right of all of them; no star centre
    may lie strictly between the leaves of another star.  A single edge may
    use either end as its centre.
    """
    edges = {(min(a, b), max(a, b)) for a, b in pos_arcs}
    adj = {v: set() for v in range(n)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen = set()
    comps = []
    for v in range(n):
        if v in seen or not adj[v]:
            continue
        stack, comp = [v], set()
        while stack:
            x = stack.pop()
            if x in comp:
                continue
            comp.add(x)
            stack.extend(adj[x])
        seen |= comp
        comps.append(comp)
    options = []
    for comp in comps:
        m = sum(1 for a, b in edges if a in comp)
        if m != len(comp) - 1:
            return False
        centres = [c for c in comp if len(adj[c]) == len(comp) - 1]
        choices = []
        for c in centres:
            leaves = comp - {c}
            if c < min(leaves) or c > max(leaves):
                choices.append((c, leaves))
        if not choices:
            return False
        options.append(choices)
    for pick in product(*options):
        if all(
            not (min(l2) < c1 < max(l2))
            for i, (c1, _) in enumerate(pick)
            for j, (_, l2) in enumerate(pick)
            if i != j
        ):
            return True
    return False


def brute_is_galaxy(n: int, arcs) -> bool:
    return any(brute_galaxy_ordering(n, backward_position_arcs(p, arcs)) for p in permutations(range(n)))


def brute_critical(T: Tournament, p: int, q: int) -> bool:
    """tr(T) < n^(p/q) and tr(S) >= |S|^(p/q) for all proper nonempty S."""
    arcs = arc_set(T)
    n = T.n
    if brute_tr(range(n), arcs) ** q >= n**p:
        return False
    for k in range(1, n):
        for S in combinations(range(n), k):
            if brute_tr(S, arcs) ** q < k**p:
                return False
    return True


@st.composite
def tournaments(draw, min_n: int = 1, max_n: int = 7) -> Tournament:
    n = draw(st.integers(min_n, max_n))
    bits = draw(st.text(alphabet="01", min_size=pair_count(n), max_size=pair_count(n)))
    return Tournament.from_bits(n, bits)


@st.composite
def permutations_of(draw, n: int) -> list[int]:
    return draw(st.permutations(list(range(n))))


def random_chain_instance(rng: random.Random, k: int, size: int, lam0: Fraction):
    """A non-smooth structure: all cross arcs forward, then backward arcs
    concentrated on a few vertices up to the pair density budget."""
    sizes = [size + rng.randint(0, 3) for _ in range(k)]
    n = sum(sizes)
    blocks = []
    pos = 0
    for s in sizes:
        blocks.append(frozenset(range(pos, pos + s)))
        pos += s
    blocks = tuple(blocks)
    w = tuple(rng.randint(0, 1) for _ in range(k))
    order = list(range(n))
    back = set()
    for i in range(k):
        for j in range(i + 1, k):
            budget = math.floor(lam0 * sizes[i] * sizes[j])
            if budget == 0:
                continue
            budget = rng.randint(0, budget)
            hubs = rng.sample(sorted(blocks[i]), min(2, sizes[i]))
            cands = [(b, a) for a in hubs for b in blocks[j]] + [(b, a) for a in blocks[i] for b in blocks[j]]
            placed = 0
            for arc in cands:
                if placed >= budget:
                    break
                if arc not in back and rng.random() < 0.6:
                    back.add(arc)
                    placed += 1
    T = Tournament.from_ordering(order, back)
    # linear blocks random inside, transitive ones keep the forward order
    out = list(T.out)
    for i, blk in enumerate(blocks):
        if w[i]:
            continue
        for a, b in combinations(sorted(blk), 2):
            if rng.random() < 0.5:
                out[a] &= ~(1 << b)
                out[b] |= 1 << a
    T = Tournament(n, tuple(out))
    c = Fraction(min(sizes), n)
    return T, ChainStructure(blocks, StructureSpec(w, c, lam0))
