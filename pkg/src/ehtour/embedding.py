"""Constructive replay of the L1/L2 embedding arguments on concrete hosts.

Given a tournament with a smooth chain structure of shape ``(A1, A2, T0, A3,
A4, A5)`` (L2) or ``(A1, A2, T0, A3, A4, A5, A6)`` (L1), :func:`replay`
either finds a copy of the pattern through one of its two named orderings or
returns a :class:`MergeCertificate` showing two large pieces that combine
into a bigger transitive set.  Every choice takes the first valid element by
vertex label, so traces are reproducible.

:func:`plant_instance` builds hosts that steer the replay into each branch.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

from .core import (
    Ordering,
    Tournament,
    mask_of,
    members,
    named,
    named_ordering,
    random_tournament,
)
from .enumeration import Embedding
from .regularity import (
    BULK_TO_TRANSITIVE,
    TRANSITIVE_TO_BULK,
    ChainStructure,
    MergeCertificate,
    StructureSpec,
    backward_matching,
    best_transitive,
    make_merge_certificate,
    verify_merge,
    verify_structure,
)

__all__ = [
    "CASES",
    "PATTERN_SHAPES",
    "ReplayError",
    "ReplayOutcome",
    "plant_instance",
    "random_tournament",
    "replay",
    "verify_outcome",
]

PATTERN_SHAPES = {
    "L2": (0, 0, 1, 0, 0, 0),
    "L1": (0, 0, 1, 0, 0, 0, 0),
}
CASES = ("BOTH", "MIRROR-U", "MIRROR-V")
LAMBDA_MAX = Fraction(1, 12)
MIN_TRANSITIVE = 5


class ReplayError(ValueError):
    """The input does not meet the replay preconditions."""


def _pattern_key(pattern: str) -> str:
    key = pattern.upper()
    if key not in PATTERN_SHAPES:
        raise ReplayError(f"pattern must be L1 or L2, got {pattern!r}")
    return key


@dataclass(frozen=True)
class ReplayOutcome:
    """Either an embedding (with the ordering it realises) or a merge certificate.

    ``vertices`` lists the six host vertices in the order of the named
    ordering; ``trace`` holds step names and ``details`` one line per step.
    """

    pattern: str
    trace: tuple[str, ...]
    details: tuple[str, ...]
    embedding: Embedding | None = None
    ordering_name: str | None = None
    vertices: tuple[int, ...] | None = None
    merge: MergeCertificate | None = None

    @property
    def kind(self) -> str:
        return "embedding" if self.embedding is not None else "merge"

    def to_json(self) -> dict[str, Any]:
        obj: dict[str, Any] = {"pattern": self.pattern, "outcome": self.kind}
        if self.embedding is not None:
            obj["vertices"] = [v + 1 for v in self.vertices or ()]
            obj["map"] = [v + 1 for v in self.embedding.map]
        else:
            obj["sets"] = self.merge.to_json() if self.merge else None
        obj["ordering_name"] = self.ordering_name
        obj["trace"] = list(self.trace)
        obj["details"] = list(self.details)
        return obj


class _Trace:
    def __init__(self) -> None:
        self.steps: list[str] = []
        self.details: list[str] = []

    def add(self, step: str, detail: str) -> None:
        self.steps.append(step)
        self.details.append(f"{step}: {detail}")


def _fmt(vs: Iterable[int]) -> str:
    return "{" + ",".join(str(v + 1) for v in sorted(vs)) + "}"


def _select(T: Tournament, pool: Iterable[int], outs: Sequence[int] = (), ins: Sequence[int] = ()) -> frozenset[int]:
    """Vertices of ``pool`` that are outneighbours of all ``outs`` and inneighbours of all ``ins``."""
    m = mask_of(pool)
    for a in outs:
        m &= T.out[a]
    for b in ins:
        m &= T.inn[b]
    return frozenset(members(m))


def _assemble(T: Tournament, pattern: str, which: str, tup: tuple[int, ...]) -> Embedding:
    order, _ = named_ordering(pattern, which)
    fmap = [0] * 6
    for pos, pv in enumerate(order):
        fmap[pv] = tup[pos]
    emb = Embedding(named(pattern), T, tuple(fmap))
    if not emb.is_valid():
        # the case analysis guarantees the pattern; reaching this is a bug
        raise AssertionError(f"assembled tuple {tup} does not induce {pattern} ({which} ordering)")
    return emb


def replay(T: Tournament, chain: ChainStructure, pattern: str) -> ReplayOutcome:
    """Run the case analysis for ``pattern`` on the chain and return its outcome."""
    key = _pattern_key(pattern)
    w = PATTERN_SHAPES[key]
    if tuple(chain.spec.w) != w:
        raise ReplayError(f"{key} needs w = {w}, got {tuple(chain.spec.w)}")
    if chain.spec.lam > LAMBDA_MAX:
        raise ReplayError(f"lambda must be at most {LAMBDA_MAX}")
    ok, why = verify_structure(T, chain, smooth=True)
    if not ok:
        raise ReplayError(f"chain is not a smooth structure: {why}")
    if len(chain.sets[2]) < MIN_TRANSITIVE:
        raise ReplayError(f"transitive set needs at least {MIN_TRANSITIVE} vertices")

    tr = _Trace()
    A = [frozenset(s) for s in chain.sets]
    A1, A2, T0, A3, A4, A5 = A[0], A[1], A[2], A[3], A[4], A[5]
    A6 = A[6] if key == "L1" else frozenset()

    def done_merge(cert: MergeCertificate, detail: str) -> ReplayOutcome:
        tr.add("merge", detail)
        return ReplayOutcome(key, tuple(tr.steps), tuple(tr.details), merge=cert)

    def done_embed(which: str, tup: tuple[int, ...]) -> ReplayOutcome:
        emb = _assemble(T, key, which, tup)
        tr.add(f"{which}-assemble", "tuple " + ",".join(str(v + 1) for v in tup))
        return ReplayOutcome(key, tuple(tr.steps), tuple(tr.details), emb, which, tup)

    order0 = T.transitive_order(T0)
    keep = len(order0) - len(order0) % 3
    S = order0[:keep]
    tr.add("trim", f"|T0|={len(order0)}, kept {keep}")
    third = keep // 3
    T1, T2, T3 = S[:third], S[third : 2 * third], S[2 * third :]
    tr.add("split", f"T1={_fmt(T1)} T2={_fmt(T2)} T3={_fmt(T3)}")

    m = max(1, math.floor(chain.spec.c * T.n / 2))
    mo = backward_matching(T, A1, A5, m)
    if not mo.is_matching:
        xs, ys = mo.complete_pair
        tr.add("match", f"maximum matching {len(mo.pairs)} < m={m}")
        if not xs or not ys:
            raise ReplayError("complete pair has an empty side; structure is outside the matching regime")
        cert = make_merge_certificate(T, xs, best_transitive(T, ys))
        return done_merge(cert, f"complete pair X'={_fmt(xs)} to Y'={_fmt(ys)}")
    pairs = mo.pairs
    tr.add("match", f"{len(pairs)} backward pairs (m={m})")

    t1, t3 = mask_of(T1), mask_of(T3)
    x_wrong = [x for x, _ in pairs if T.out[x] & t3 == t3]
    y_wrong = [y for _, y in pairs if T.inn[y] & t1 == t1]
    good = [(x, y) for x, y in pairs if x not in x_wrong and y not in y_wrong]
    if not good:
        if len(x_wrong) >= len(y_wrong):
            cert = MergeCertificate(
                T.transitive_order(T3), frozenset(x_wrong), best_transitive(T, x_wrong), BULK_TO_TRANSITIVE, 0
            )
            detail = f"X_wrong={_fmt(x_wrong)} complete to T3"
        else:
            cert = MergeCertificate(
                T.transitive_order(T1), frozenset(y_wrong), best_transitive(T, y_wrong), TRANSITIVE_TO_BULK, 0
            )
            detail = f"Y_wrong={_fmt(y_wrong)} complete from T1"
        cert = MergeCertificate(
            cert.transitive_part,
            cert.bulk,
            cert.bulk_witness,
            cert.direction,
            len(cert.transitive_part) + len(cert.bulk_witness),
        )
        return done_merge(cert, detail)

    x, y = good[0]
    u = min(_select(T, T1, outs=(y,)))
    v = min(_select(T, T3, ins=(x,)))
    tr.add("pick-j", f"x={x + 1} y={y + 1} u={u + 1} v={v + 1} ({len(good)} good of {len(pairs)})")

    if T.edge(x, u) and T.edge(v, y):
        tr.add("case-BOTH", "x->u and v->y")
        T2s = _select(T, T2, outs=(x,), ins=(y,))
        if key == "L2":
            Rs = _select(T, A3, outs=(x, u, v), ins=(y,))
        else:
            Rs = _select(T, A6, outs=(x, u, v, y))
        if not T2s or not Rs:
            raise ReplayError("a starred set is empty")
        zw = backward_matching(T, T2s, Rs, 1)
        if not zw.is_matching:
            cert = make_merge_certificate(T, Rs, T2s)
            return done_merge(cert, f"T2*={_fmt(T2s)} complete to {_fmt(Rs)}")
        wv, z = zw.pairs[0]
        tup = (x, u, wv, v, z, y) if key == "L2" else (x, u, wv, v, y, z)
        return done_embed("forest", tup)

    if T.edge(u, x):
        tr.add("case-U", "u->x")
        pivot = u
    else:
        tr.add("case-V", "x->u, y->v")
        pivot = v
    A2s = _select(T, A2, outs=(x,), ins=(pivot, y))
    mid, last = (A4, A3) if key == "L2" else (A3, A4)
    Ms = _select(T, mid, outs=(x, pivot), ins=(y,))
    if not A2s or not Ms:
        raise ReplayError("a starred set is empty")
    zw = backward_matching(T, A2s, Ms, 1)
    if not zw.is_matching:
        cert = make_merge_certificate(T, A2s, best_transitive(T, Ms))
        return done_merge(cert, f"A2*={_fmt(A2s)} complete to {_fmt(Ms)}")
    wv, z = zw.pairs[0]
    if key == "L2":
        Ls = _select(T, last, outs=(x, wv, pivot), ins=(z, y))
    else:
        Ls = _select(T, last, outs=(x, wv, pivot, z), ins=(y,))
    if not Ls:
        raise ReplayError("a starred set is empty")
    s = min(Ls)
    tr.add("pick-s", f"w={wv + 1} z={z + 1} s={s + 1}")
    tup = (x, wv, pivot, s, z, y) if key == "L2" else (x, wv, pivot, z, s, y)
    return done_embed("cyclic", tup)


def verify_outcome(T: Tournament, outcome: ReplayOutcome, pattern: str) -> tuple[bool, str]:
    """Re-check a replay outcome from scratch; the trace is not consulted."""
    key = _pattern_key(pattern)
    if outcome.embedding is not None:
        emb = Embedding(named(key), T, outcome.embedding.map)
        if not emb.is_valid():
            return False, "embedding does not induce the pattern"
        if outcome.ordering_name is not None and outcome.vertices is not None:
            order, _ = named_ordering(key, outcome.ordering_name)
            if tuple(emb.map[pv] for pv in order) != tuple(outcome.vertices):
                return False, "vertex tuple does not follow the named ordering"
        return True, ""
    if outcome.merge is not None:
        return verify_merge(T, outcome.merge)
    return False, "outcome carries neither an embedding nor a certificate"


# planted instances -------------------------------------------------------------


@dataclass
class _Budget:
    """Per-vertex and per-block-pair caps on backward arcs that keep smoothness."""

    lam: Fraction
    block_of: dict[int, int]
    sizes: list[int]
    vertex: dict[tuple[int, int], int] = field(default_factory=dict)
    pair: dict[tuple[int, int], int] = field(default_factory=dict)

    def can_add(self, a: int, b: int) -> bool:
        ba, bb = self.block_of[a], self.block_of[b]
        return (
            self.vertex.get((a, bb), 0) + 1 <= self.lam * self.sizes[bb]
            and self.vertex.get((b, ba), 0) + 1 <= self.lam * self.sizes[ba]
            and self.pair.get((bb, ba), 0) + 1 <= self.lam * self.sizes[ba] * self.sizes[bb]
        )

    def add(self, a: int, b: int) -> None:
        ba, bb = self.block_of[a], self.block_of[b]
        self.vertex[(a, bb)] = self.vertex.get((a, bb), 0) + 1
        self.vertex[(b, ba)] = self.vertex.get((b, ba), 0) + 1
        self.pair[(bb, ba)] = self.pair.get((bb, ba), 0) + 1


def min_sizes(pattern: str, case: str, lam: Fraction = LAMBDA_MAX) -> list[int]:
    """Smallest set sizes for which :func:`plant_instance` can force ``case``.

    A vertex can carry one backward arc to a set only if the set has at
    least ``1/lambda`` vertices; in the mirrored cases one vertex needs two
    backward arcs from the transitive set.
    """
    key = _pattern_key(pattern)
    if case not in CASES:
        raise ReplayError(f"case must be one of {', '.join(CASES)}")
    per = math.ceil(1 / lam)
    t0 = max(per if case == "BOTH" else math.ceil(2 / lam), 9)
    return [t0 if wi else per for wi in PATTERN_SHAPES[key]]


def plant_instance(
    pattern: str,
    case: str,
    seed: int,
    sizes: Sequence[int] | None = None,
    lam: Fraction = LAMBDA_MAX,
    noise: bool = True,
) -> tuple[Tournament, ChainStructure]:
    """A host with a smooth chain structure that sends :func:`replay` down ``case``.

    Blocks are laid out left to right with every cross-block arc forward,
    linear blocks random inside and the transitive block ordered randomly.
    Then a backward matching ``A5 -> A1`` is planted together with the few
    backward arcs that make exactly one matched pair good and select the
    case.  With ``noise`` further random backward arcs are added within the
    smoothness budget, away from the planted vertices and the blocks the
    matching step looks at.  Labels are shuffled.  Deterministic in ``seed``.
    """
    key = _pattern_key(pattern)
    lam = Fraction(lam)
    if not 0 < lam <= LAMBDA_MAX:
        raise ReplayError(f"lambda must lie in (0, {LAMBDA_MAX}]")
    w = PATTERN_SHAPES[key]
    need = min_sizes(key, case, lam)
    sizes = list(sizes) if sizes is not None else need
    if len(sizes) != len(w):
        raise ReplayError(f"{key} needs {len(w)} set sizes")
    for i, (s, lo) in enumerate(zip(sizes, need)):
        if s < lo:
            raise ReplayError(f"set {i + 1} needs at least {lo} vertices for case {case} at lambda={lam}")
    rng = random.Random(seed)
    n = sum(sizes)
    labels = list(range(n))
    rng.shuffle(labels)
    blocks: list[list[int]] = []
    pos = 0
    for s in sizes:
        blocks.append(labels[pos : pos + s])
        pos += s
    block_of = {v: b for b, vs in enumerate(blocks) for v in vs}
    rank = {v: i for i, v in enumerate(labels)}

    # forward everywhere, random inside linear blocks, T0 in the given order
    out = [0] * n
    for a in range(n):
        for b in range(a + 1, n):
            ba, bb = block_of[a], block_of[b]
            if ba == bb and w[ba] == 0:
                fwd = rng.random() < 0.5
            else:
                fwd = rank[a] < rank[b]
            if fwd:
                out[a] |= 1 << b
            else:
                out[b] |= 1 << a

    def back(a: int, b: int) -> None:
        # make a -> b where b was before a
        out[b] &= ~(1 << a)
        out[a] |= 1 << b
        budget.add(a, b)

    budget = _Budget(lam, block_of, sizes)
    iA1, iA2, iT0, iA3, iA4, iA5 = 0, 1, 2, 3, 4, 5
    A1, A2, T0, A3, A4, A5 = (blocks[i] for i in (iA1, iA2, iT0, iA3, iA4, iA5))
    A6 = blocks[6] if key == "L1" else []

    keep = len(T0) - len(T0) % 3
    third = keep // 3
    T1, T2, T3 = T0[:third], T0[third : 2 * third], T0[2 * third : keep]

    xs = list(A1)
    ys = list(A5)
    rng.shuffle(xs)
    rng.shuffle(ys)
    P = min(len(A1), len(A5), math.floor(lam * len(A1) * len(A5)))
    matched = list(zip(xs[:P], ys[:P]))
    for x, y in matched:
        back(y, x)
    x, y = rng.choice(matched)
    u = rng.choice(T1)
    v = rng.choice(T3)
    back(v, x)
    back(y, u)
    special = {x, y, u, v}
    if case == "BOTH":
        w_ = rng.choice(T2)
        z = rng.choice(A3 if key == "L2" else A6)
        back(z, w_)
    else:
        if case == "MIRROR-U":
            back(u, x)
        else:
            back(y, v)
        w_ = rng.choice(A2)
        z = rng.choice(A4 if key == "L2" else A3)
        back(z, w_)
    special |= {w_, z}

    if noise:
        skip = {(iA1, iT0), (iT0, iA5), (iA1, iA5)}
        for i in range(len(blocks)):
            for j in range(i + 1, len(blocks)):
                if (i, j) in skip:
                    continue
                cap = math.floor(lam * sizes[i] * sizes[j])
                target = rng.randint(0, cap)
                for _ in range(3 * target):
                    if budget.pair.get((j, i), 0) >= target:
                        break
                    a = rng.choice(blocks[j])
                    b = rng.choice(blocks[i])
                    if a in special or b in special or not (out[b] >> a) & 1:
                        continue
                    if budget.can_add(a, b):
                        back(a, b)

    T = Tournament(n, tuple(out))
    c = Fraction(min(sizes), n)
    chain = ChainStructure(tuple(frozenset(b) for b in blocks), StructureSpec(w, c, lam))
    ok, why = verify_structure(T, chain, smooth=True)
    if not ok:
        raise AssertionError(f"planted instance is not smooth: {why}")
    return T, chain
