"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run standalone with ``python3 tests/test_acceptance.py`` or through pytest;
the collected lines are repeated in the terminal summary.
"""

from __future__ import annotations

import json
import random
import sys
import time
from fractions import Fraction
from itertools import combinations, permutations

import pytest
from conftest import (
    ACCEPTANCE,
    arc_set,
    arcs_of,
    backward_position_arcs,
    brute_canon,
    brute_critical,
    brute_galaxy_ordering,
    brute_homogeneous_exists,
    brute_is_galaxy,
    brute_tr,
    brute_transitive,
    is_forest,
    random_chain_instance,
)

from ehtour import core, enumeration, regularity, structure
from ehtour.cli import run
from ehtour.core import Tournament
from ehtour.embedding import CASES, plant_instance, replay, verify_outcome


def record(cid: str, desc: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {cid}: {desc}" + (f" ({detail})" if detail else "")
    ACCEPTANCE.append(line)
    print(line)
    assert ok, line


# Test-side constructions from the quoted orderings (1-based labels) -------------------------


def from_quoted(order, backward) -> set[tuple[int, int]]:
    """Arc set (0-based) of the tournament whose ordering has exactly ``backward``."""
    back = {(a - 1, b - 1) for a, b in backward}
    order = [v - 1 for v in order]
    arcs = set()
    for i, j in combinations(range(len(order)), 2):
        a, b = order[i], order[j]
        arcs.add((b, a) if (b, a) in back else (a, b))
    return arcs


def reversed_arcs(arcs):
    return {(b, a) for a, b in arcs}


K6_ARCS = from_quoted((1, 2, 3, 4, 5, 6), [(4, 1), (6, 3), (6, 1), (5, 2)])
L1_FOREST = ((3, 4, 5, 1, 2, 6), {(1, 3), (2, 4), (2, 3), (6, 5)})
L1_CYCLIC = ((2, 4, 1, 3, 6, 5), {(1, 2), (5, 1), (5, 2), (3, 4)})
L2_FOREST = ((1, 2, 3, 4, 6, 5), {(4, 1), (5, 2), (5, 1), (6, 3)})
L2_CYCLIC = ((2, 4, 1, 6, 3, 5), {(1, 2), (5, 1), (5, 2), (3, 4)})
L1_ARCS = from_quoted(*L1_FOREST)
L2_ARCS = from_quoted(*L2_FOREST)
# C5: i -> i+1, i+2 (mod 5)
C5_ARCS = {(i, (i + d) % 5) for i in range(5) for d in (1, 2)}
# positions a..f = 0..5 with backward arcs (f,a), (e,a), (d,b), (f,c)
OUTCOME4_POSITIONS = sorted([(5, 0), (4, 0), (3, 1), (5, 2)])


def as_tournament(n, arcs) -> Tournament:
    return Tournament.from_arcs(n, sorted(arcs))


# 1 -------------------------------------------------------------------------------------------


def test_c1_enumeration_counts():
    expected = [1, 1, 2, 4, 12, 56, 456]
    enumeration._enumerate_cached.cache_clear()
    counts, agree = [], True
    t7 = 0.0
    for n in range(1, 8):
        t0 = time.perf_counter()
        orderly = enumeration.enumerate_classes(n)
        if n == 7:
            t7 = time.perf_counter() - t0
        labeled = enumeration.enumerate_classes_labeled(n)
        counts.append(len(orderly))
        agree &= sorted(orderly) == sorted(labeled)
    ok = counts == expected and agree and t7 <= 60
    record("C1", "class counts n=1..7 with both routes agreeing", ok, f"counts={counts} agree={agree} n7={t7:.1f}s")


# 2 -------------------------------------------------------------------------------------------


def _recheck_witness(arcs, k, w) -> bool:
    if k == 1:
        order = [v - 1 for v in w["ordering"]]
        return sorted(order) == list(range(6)) and brute_galaxy_ordering(6, backward_position_arcs(order, arcs))
    if k == 2:
        v = w["vertex"] - 1
        img = [x - 1 for x in w["c5_map"]]
        if v in img or len(set(img)) != 5:
            return False
        iso = all(((img[a], img[b]) in arcs) == ((a, b) in C5_ARCS) for a in range(5) for b in range(5) if a != b)
        deg = sum(((v, u) in arcs) if w["degree"] == "out" else ((u, v) in arcs) for u in img)
        return iso and deg == 1
    if k == 3:
        S = {x - 1 for x in w["set"]}
        return 1 < len(S) < 6 and all(
            all((v, s) in arcs for s in S) or all((s, v) in arcs for s in S) for v in range(6) if v not in S
        )
    if k == 4:
        H = arcs if w["side"] == "T" else reversed_arcs(arcs)
        return backward_position_arcs([v - 1 for v in w["ordering"]], H) == OUTCOME4_POSITIONS
    if k == 5:
        f = [x - 1 for x in w["map"]]
        return sorted(f) == list(range(6)) and all(((f[a], f[b]) in K6_ARCS) for a, b in arcs)
    return False


def test_c2_six_vertex_classification(tmp_path):
    report = tmp_path / "records.jsonl"
    t0 = time.perf_counter()
    res = run(["verify-lemma22", "--report", str(report)])
    elapsed = time.perf_counter() - t0
    summary = json.loads(res.stdout)
    rows = [json.loads(line) for line in report.read_text().splitlines()]
    rechecked = 0
    for row in rows:
        arcs = arcs_of(6, row["bits"])
        for k in row["outcomes"]:
            rechecked += _recheck_witness(arcs, k, row["witnesses"][str(k)])
    total = sum(len(r["outcomes"]) for r in rows)
    ok = (
        res.code == 0
        and summary["classes"] == 56
        and len(rows) == 56
        and all(r["outcomes"] for r in rows)
        and rechecked == total
        and elapsed <= 120
    )
    record("C2", "all 56 six-vertex classes have an outcome, witnesses re-checked", ok,
           f"witnesses {rechecked}/{total}, {elapsed:.1f}s")


# 3 -------------------------------------------------------------------------------------------


def test_c3_classes_failing_135():
    records = structure.classify_all()
    failing = {r.bits for r in records if not set(r.outcomes) & {1, 3, 5}}
    expected = {brute_canon(6, a) for a in (L1_ARCS, reversed_arcs(L1_ARCS), L2_ARCS, reversed_arcs(L2_ARCS))}
    record("C3", "classes failing outcomes 1, 3, 5 are exactly L1, L1c, L2, L2c", failing == expected,
           f"{len(failing)} failing, {len(expected)} expected")


# 4 -------------------------------------------------------------------------------------------


def test_c4a_k6_single_forest_ordering():
    K6 = as_tournament(6, K6_ARCS)
    brute = sum(1 for p in permutations(range(6)) if is_forest(6, backward_position_arcs(p, K6_ARCS)))
    count, _ = structure.count_forest_orderings(K6)
    record("C4a", "exactly 1 of 720 orderings of K6 is a forest ordering", count == brute == 1,
           f"package={count} brute={brute}")


def test_c4b_k6_not_galaxy():
    K6 = as_tournament(6, K6_ARCS)
    ok = not structure.is_galaxy(K6) and not brute_is_galaxy(6, K6_ARCS)
    record("C4b", "K6 has no galaxy ordering", ok)


def test_c4c_k6_prime():
    K6 = as_tournament(6, K6_ARCS)
    ok = structure.is_prime(K6) and not brute_homogeneous_exists(6, K6_ARCS)
    record("C4c", "K6 is prime", ok)


def test_c4d_k6_self_reverse():
    K6 = as_tournament(6, K6_ARCS)
    ok = enumeration.isomorphic(K6, core.reverse(K6)) and brute_canon(6, K6_ARCS) == brute_canon(
        6, reversed_arcs(K6_ARCS)
    )
    record("C4d", "K6 is isomorphic to its reversal", ok and K6 == core.named("K6"))


# 5 -------------------------------------------------------------------------------------------


def test_c5_facts():
    C5 = as_tournament(5, C5_ARCS)
    checks = {
        "named": C5 == core.named("C5"),
        "prime": structure.is_prime(C5) and not brute_homogeneous_exists(5, C5_ARCS),
        "not galaxy": not structure.is_galaxy(C5) and not brute_is_galaxy(5, C5_ARCS),
        "degrees": all(C5.outdegree(v) == 2 and C5.indegree(v) == 2 for v in range(5)),
        "self-reverse": enumeration.isomorphic(C5, core.reverse(C5))
        and brute_canon(5, C5_ARCS) == brute_canon(5, reversed_arcs(C5_ARCS)),
        "tr=3": brute_tr(range(5), C5_ARCS) == 3 == core.max_transitive(C5)[0],
    }
    classes = enumeration.enumerate_classes(5)
    bad = [b for b in classes if structure.is_prime(Tournament.from_bits(5, b)) and not structure.is_galaxy(Tournament.from_bits(5, b))]
    brute_bad = [b for b in classes if not brute_homogeneous_exists(5, arcs_of(5, b)) and not brute_is_galaxy(5, arcs_of(5, b))]
    checks["unique prime non-galaxy"] = len(classes) == 12 and len(bad) == 1 and bad == brute_bad
    failed = [k for k, v in checks.items() if not v]
    record("C5", "C5 facts", not failed, "failed: " + ", ".join(failed) if failed else "")


# 6 -------------------------------------------------------------------------------------------


def test_c6_l1_l2_coherence():
    checks = {}
    for name, arcs in (("L1", L1_ARCS), ("L2", L2_ARCS)):
        T = core.named(name)
        checks[f"{name} named"] = arc_set(T) == arcs
        rest = {(a, b) for a, b in arcs if 5 not in (a, b)}
        checks[f"{name}-v6 is C5"] = brute_canon(5, rest) == brute_canon(5, C5_ARCS)
        checks[f"{name}-v6 package iso"] = enumeration.isomorphic(core.induced(T, range(5))[0], core.named("C5"))
    checks["L1 v6 outdegree 1"] = sum((5, u) in L1_ARCS for u in range(5)) == 1
    ins = [u for u in range(5) if (u, 5) in L2_ARCS]
    checks["L2 v6 inneighbours cyclic"] = len(ins) == 3 and not brute_transitive(ins, L2_ARCS)
    for name, arcs, quoted in (
        ("L1", L1_ARCS, {"forest": L1_FOREST, "cyclic": L1_CYCLIC}),
        ("L2", L2_ARCS, {"forest": L2_FOREST, "cyclic": L2_CYCLIC}),
    ):
        for which, (order, back) in quoted.items():
            pos = backward_position_arcs([v - 1 for v in order], arcs)
            idx = {v: i for i, v in enumerate(order)}
            want = sorted((idx[a], idx[b]) for a, b in back)
            pkg_order, _ = core.named_ordering(name, which)
            pkg = sorted(core.backward_graph(core.named(name), pkg_order).position_arcs())
            checks[f"{name} {which}"] = pos == want == pkg
    failed = [k for k, v in checks.items() if not v]
    record("C6", "L1/L2 definitions and quoted orderings", not failed, "failed: " + ", ".join(failed) if failed else "")


# 7 -------------------------------------------------------------------------------------------


def test_c7_degree_counts():
    checked, exceptions = 0, 0
    for bits in enumeration.enumerate_classes(6):
        T = Tournament.from_bits(6, bits)
        if max(T.outdegree(v) for v in range(6)) > 3 or max(T.indegree(v) for v in range(6)) > 3:
            continue
        checked += 1
        n32 = sum(T.outdegree(v) == 3 and T.indegree(v) == 2 for v in range(6))
        n23 = sum(T.outdegree(v) == 2 and T.indegree(v) == 3 for v in range(6))
        exceptions += not (n32 == n23 == 3)
    record("C7", "n32 = n23 = 3 on six-vertex classes with degrees <= 3", checked > 0 and exceptions == 0,
           f"{checked} classes, {exceptions} exceptions")


# 8 -------------------------------------------------------------------------------------------


def _brute_matching(xs, adj) -> int:
    best = 0

    def go(i, used, size):
        nonlocal best
        best = max(best, size)
        if i == len(xs) or size + len(xs) - i <= best:
            return
        for y in adj[xs[i]]:
            if y not in used:
                go(i + 1, used | {y}, size + 1)
        go(i + 1, used, size)

    go(0, frozenset(), 0)
    return best


def _brute_cover(xs, adj) -> int:
    best = None
    for r in range(len(xs) + 1):
        for cx in combinations(xs, r):
            cy = {y for x in xs if x not in cx for y in adj[x]}
            size = r + len(cy)
            best = size if best is None else min(best, size)
    return best


def test_c8a_konig_duality():
    rng = random.Random(8)
    mismatches = 0
    for _ in range(1000):
        nx, ny = rng.randint(1, 8), rng.randint(1, 8)
        p = rng.random()
        xs, ys = list(range(nx)), list(range(100, 100 + ny))
        adj = {x: [y for y in ys if rng.random() < p] for x in xs}
        match = regularity.max_bipartite_matching(xs, adj)
        cx, cy = regularity.konig_cover(xs, adj, match)
        valid_match = len(set(match.values())) == len(match) and all(y in adj[x] for x, y in match.items())
        valid_cover = all(x in cx or y in cy for x in xs for y in adj[x])
        bm, bc = _brute_matching(xs, adj), _brute_cover(xs, adj)
        if not (valid_match and valid_cover and len(match) == len(cx) + len(cy) == bm == bc):
            mismatches += 1
    record("C8a", "Konig duality on 1000 random bipartite graphs", mismatches == 0, f"{mismatches} mismatches")


def test_c8b_smooth_refine():
    rng = random.Random(88)
    failures, removed = 0, 0
    for _ in range(200):
        k = rng.randint(2, 5)
        lam0 = Fraction(1, 4 * k + rng.randint(1, 4))
        T, chain = random_chain_instance(rng, k, rng.randint(8, 14), lam0)
        assert regularity.verify_structure(T, chain)[0]
        out = regularity.smooth_refine(T, chain)
        removed += sum(len(a) - len(b) for a, b in zip(chain.sets, out.sets))
        good = (
            all(2 * len(b) >= len(a) for a, b in zip(chain.sets, out.sets))
            and out.spec.lam == 4 * k * lam0
            and out.spec.c == chain.spec.c / 2
            and regularity.verify_structure(T, out, smooth=True)[0]
        )
        failures += not good
    record("C8b", "smooth_refine on 200 random structures", failures == 0 and removed > 0,
           f"{failures} failures, {removed} vertices dropped")


# 9 -------------------------------------------------------------------------------------------


def _strip(T, chain, i, j):
    for b in chain.sets[j]:
        for a in chain.sets[i]:
            if T.edge(b, a):
                T = T.with_arc(a, b)
    return T


def _embedding_ok(T, out, pattern) -> bool:
    sub_arcs = arc_set(core.induced_ordered(T, out.vertices))
    found = enumeration.find_embedding(core.induced_ordered(T, out.vertices), core.named(pattern))
    m = out.embedding.map
    direct = all(T.edge(m[a], m[b]) for a, b in arc_set(core.named(pattern)))
    return found is not None and direct and len(sub_arcs) == 15


def test_c9_replay_soundness():
    t0 = time.perf_counter()
    stats = {"instances": 0, "verified": 0, "embeddings": 0, "confirmed": 0, "merges": 0, "merges_ok": 0}
    for pattern in ("L1", "L2"):
        for seed in range(500):
            case = CASES[seed % 3]
            T, chain = plant_instance(pattern, case, seed)
            # the stripped copy has no backward arc between the matched sets, forcing a merge branch
            variants = [T, _strip(T, chain, 0, 5)]
            for k, H in enumerate(variants):
                out = replay(H, chain, pattern)
                if k == 0:
                    stats["instances"] += 1
                    stats["verified"] += verify_outcome(H, out, pattern)[0]
                elif not verify_outcome(H, out, pattern)[0]:
                    stats["verified"] -= 10**6
                if out.kind == "embedding":
                    stats["embeddings"] += 1
                    stats["confirmed"] += _embedding_ok(H, out, pattern)
                else:
                    stats["merges"] += 1
                    stats["merges_ok"] += regularity.verify_merge(H, out.merge)[0]
    elapsed = time.perf_counter() - t0
    ok = (
        stats["instances"] == 1000
        and stats["verified"] == 1000
        and stats["confirmed"] == stats["embeddings"]
        and stats["merges_ok"] == stats["merges"]
        and elapsed <= 300
    )
    record("C9", "replay on 500 planted instances per pattern", ok,
           ", ".join(f"{k}={v}" for k, v in stats.items()) + f", {elapsed:.1f}s")


# 10 ------------------------------------------------------------------------------------------


EPSILONS = [(1, 2), (2, 3), (3, 4)]


def test_c10_epsilon_critical():
    disagreements, cases, critical = 0, 0, 0
    tours = [Tournament.from_bits(n, b) for n in range(1, 8) for b in enumeration.enumerate_classes(n)]
    tours += [core.random_tournament(10, seed) for seed in range(100)]
    for T in tours:
        for p, q in EPSILONS:
            got = regularity.is_epsilon_critical(T, Fraction(p, q))[0]
            want = brute_critical(T, p, q)
            disagreements += got != want
            critical += want
            cases += 1
    record("C10", "epsilon-criticality against the subset oracle", disagreements == 0,
           f"{cases} cases, {critical} critical, {disagreements} disagreements")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s"]))
