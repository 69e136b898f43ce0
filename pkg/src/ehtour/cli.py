"""Command-line interface: ``python -m ehtour <command> ...``.

Machine-readable results go to stdout (JSON, JSON lines, TRN1 or DOT) and
diagnostics to stderr.  Exit codes: 0 success, 1 a negative answer (not
isomorphic, not found, verification failed), 2 usage or input error.
"""

from __future__ import annotations

import argparse
import contextlib
import io
import json
import sys
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Sequence

from . import core, embedding, enumeration, regularity, structure
from .core import Tournament, TournamentError

EXIT_OK, EXIT_FALSE, EXIT_USAGE = 0, 1, 2


@dataclass(frozen=True)
class CommandResult:
    code: int
    stdout: str = ""
    stderr: str = ""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _dump(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True) + "\n"


def _one(vs) -> list[int]:
    return [v + 1 for v in vs]


def _vertex_list(text: str, n: int | None = None) -> list[int]:
    """Parse ``"1,2,5"`` (1-based) into 0-based labels."""
    if not text.strip():
        return []
    try:
        vs = [int(t) - 1 for t in text.split(",")]
    except ValueError:
        raise UsageError(f"bad vertex list {text!r}") from None
    if n is not None and any(not 0 <= v < n for v in vs):
        raise UsageError(f"vertex list {text!r} has labels outside 1..{n}")
    return vs


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


# dot export ----------------------------------------------------------------------


def export_dot(T: Tournament, ordering: Sequence[int] | None = None) -> str:
    """DOT digraph; under an ordering, vertices sit on a line and backward arcs are dashed.

    Backward arcs carry ``class="backward"``; nodes carry their 1-based
    position as ``order``.
    """
    lines = ["digraph T {"]
    if ordering is None:
        for v in range(T.n):
            lines.append(f'  v{v + 1} [label="v{v + 1}"];')
        for a, b in T.arcs():
            lines.append(f"  v{a + 1} -> v{b + 1};")
    else:
        core.check_ordering(T, ordering)
        pos = {v: i for i, v in enumerate(ordering)}
        lines.append("  rankdir=LR;")
        for i, v in enumerate(ordering):
            lines.append(f'  v{v + 1} [label="v{v + 1}", order={i + 1}, pos="{i},0!"];')
        for a, b in sorted(T.arcs(), key=lambda e: (pos[e[0]], pos[e[1]])):
            if pos[a] > pos[b]:
                lines.append(f'  v{a + 1} -> v{b + 1} [class="backward", style=dashed, constraint=false];')
            else:
                lines.append(f"  v{a + 1} -> v{b + 1};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# input helpers -----------------------------------------------------------------------


def _load(path: str | None, name: str | None, what: str = "tournament") -> Tournament:
    if path and name:
        raise UsageError(f"give either a file or a name for the {what}, not both")
    if name:
        return core.named(name)
    if path:
        if path == "-":
            return core.parse(sys.stdin.read())
        return core.read_trn1(path)
    raise UsageError(f"a {what} is required (--file or --named)")


def _first(args) -> Tournament:
    return _load(args.file, args.named)


def _second(args) -> Tournament:
    return _load(args.file2, args.named2, "second tournament")


def _chain(path: str) -> regularity.ChainStructure:
    try:
        with open(path) as fh:
            return regularity.ChainStructure.from_json(json.load(fh))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed chain structure in {path}: {exc}") from None


# commands --------------------------------------------------------------------------------


def cmd_enumerate(args) -> CommandResult:
    if args.method == "orderly":
        classes = enumeration.enumerate_classes(args.n, jobs=args.jobs)
    else:
        classes = enumeration.enumerate_classes_labeled(args.n)
    if args.format == "trn":
        text = "".join(f"{args.n}\n{b}\n" for b in classes)
    else:
        text = "".join(_dump({"n": args.n, "bits": b, "index": i}) for i, b in enumerate(classes))
    return CommandResult(EXIT_OK, text, f"{len(classes)} classes\n")


def cmd_canon(args) -> CommandResult:
    T = _first(args)
    bits, order = enumeration.canonical_labeling(T)
    if args.json:
        return CommandResult(EXIT_OK, _dump({"n": T.n, "bits": bits, "ordering": _one(order)}))
    return CommandResult(EXIT_OK, f"{T.n}\n{bits}\n")


def cmd_iso(args) -> CommandResult:
    ok, f = enumeration.is_isomorphic(_first(args), _second(args))
    return CommandResult(EXIT_OK if ok else EXIT_FALSE, _dump({"isomorphic": ok, "map": _one(f) if f else None}))


def cmd_contains(args) -> CommandResult:
    emb = enumeration.find_embedding(_first(args), _second(args))
    obj = {"contains": emb is not None, "map": _one(emb.map) if emb else None}
    return CommandResult(EXIT_OK if emb else EXIT_FALSE, _dump(obj))


def cmd_tr(args) -> CommandResult:
    T = _first(args)
    if T.n <= core.TR_EXACT_MAX:
        size, _ = core.max_transitive(T)
        witness = T.tr_table.witness(T.full)
        return CommandResult(EXIT_OK, _dump({"tr": size, "exact": True, "witness": _one(witness)}))
    lower = core.greedy_transitive(T, range(T.n))
    obj = {"tr": None, "exact": False, "lower": len(lower), "upper": core.tr_upper_bound(T), "witness": _one(lower)}
    return CommandResult(EXIT_OK, _dump(obj))


def cmd_homog(args) -> CommandResult:
    S = structure.find_homogeneous(_first(args))
    obj = {"prime": S is None, "set": _one(sorted(S)) if S else None}
    return CommandResult(EXIT_FALSE if S is None else EXIT_OK, _dump(obj))


def cmd_galaxy(args) -> CommandResult:
    order = structure.find_galaxy_ordering(_first(args))
    obj = {"galaxy": order is not None, "ordering": _one(order) if order else None}
    return CommandResult(EXIT_OK if order else EXIT_FALSE, _dump(obj))


def cmd_forest_count(args) -> CommandResult:
    count, orders = structure.count_forest_orderings(_first(args))
    obj: dict[str, Any] = {"count": count}
    if args.list:
        obj["orderings"] = [_one(o) for o in orders]
    return CommandResult(EXIT_OK, _dump(obj))


def cmd_classify6(args) -> CommandResult:
    if args.all:
        records = structure.classify_all(jobs=args.jobs)
        text = structure.records_jsonl(records)
        empty = sum(1 for r in records if not r.outcomes)
        if args.report:
            with open(args.report, "w") as fh:
                fh.write(text)
            text = _dump({"classes": len(records), "empty": empty, "report": args.report})
        return CommandResult(EXIT_FALSE if empty else EXIT_OK, text)
    T = _first(args)
    if T.n != 6:
        raise UsageError("classify6 needs a six-vertex tournament")
    rec = structure.classify6(T)
    return CommandResult(EXIT_OK if rec.outcomes else EXIT_FALSE, _dump(rec.to_json()))


def cmd_verify_lemma22(args) -> CommandResult:
    records = structure.classify_all(jobs=args.jobs)
    failures = []
    for rec in records:
        ok, why = structure.check_record(Tournament.from_bits(6, rec.bits), rec)
        if not rec.outcomes:
            failures.append({"bits": rec.bits, "reason": "no outcome holds"})
        elif not ok:
            failures.append({"bits": rec.bits, "reason": why})
    counts = Counter(",".join(map(str, r.outcomes)) for r in records)
    obj = {
        "classes": len(records),
        "all_nonempty": all(r.outcomes for r in records),
        "witnesses_ok": not failures,
        "failures": failures,
        "outcome_sets": dict(sorted(counts.items())),
    }
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(structure.records_jsonl(records))
    ok = len(records) == 56 and not failures
    return CommandResult(EXIT_OK if ok else EXIT_FALSE, _dump(obj))


def cmd_density(args) -> CommandResult:
    T = _first(args)
    X, Y = _vertex_list(args.x, T.n), _vertex_list(args.y, T.n)
    d = core.density(T, X, Y)
    return CommandResult(EXIT_OK, _dump({"density": str(d), "forward": core.forward_count(T, X, Y)}))


def cmd_critical(args) -> CommandResult:
    T = _first(args)
    if T.n > regularity.CRITICAL_MAX_N:
        raise UsageError(f"critical needs n <= {regularity.CRITICAL_MAX_N}")
    crit, S = regularity.is_epsilon_critical(T, args.eps)
    obj = {"critical": crit, "epsilon": str(args.eps), "violating_set": _one(sorted(S)) if S else None}
    return CommandResult(EXIT_OK if crit else EXIT_FALSE, _dump(obj))


def cmd_verify_structure(args) -> CommandResult:
    T = _first(args)
    ok, why = regularity.verify_structure(T, _chain(args.chain), smooth=args.smooth)
    return CommandResult(EXIT_OK if ok else EXIT_FALSE, _dump({"ok": ok, "violation": why}))


def cmd_refine(args) -> CommandResult:
    T = _first(args)
    refined = regularity.smooth_refine(T, _chain(args.chain))
    return CommandResult(EXIT_OK, _dump(refined.to_json()))


def cmd_match(args) -> CommandResult:
    T = _first(args)
    mo = regularity.backward_matching(T, _vertex_list(args.x, T.n), _vertex_list(args.y, T.n), args.m)
    obj: dict[str, Any] = {
        "m": mo.m,
        "matching": mo.is_matching,
        "pairs": [[x + 1, y + 1] for x, y in mo.pairs],
    }
    if mo.complete_pair is not None:
        obj["cover"] = _one(sorted(mo.cover or ()))
        obj["complete_pair"] = [_one(sorted(s)) for s in mo.complete_pair]
    return CommandResult(EXIT_OK, _dump(obj))


def cmd_merge(args) -> CommandResult:
    T = _first(args)
    cert = regularity.make_merge_certificate(T, _vertex_list(args.bulk, T.n), _vertex_list(args.transitive, T.n))
    ok, why = regularity.verify_merge(T, cert)
    merged = regularity.merge_transitive(T, cert.bulk_witness, cert.transitive_part)
    obj = {"certificate": cert.to_json(), "merged": _one(merged), "ok": ok, "reason": why}
    return CommandResult(EXIT_OK if ok else EXIT_FALSE, _dump(obj))


def cmd_find_structure(args) -> CommandResult:
    T = _first(args)
    try:
        w = tuple(int(t) for t in args.w.split(","))
    except ValueError:
        raise UsageError(f"bad w vector {args.w!r}") from None
    spec = regularity.StructureSpec(w, args.c, args.lam)
    chain = regularity.find_structure(T, spec)
    if chain is None:
        return CommandResult(EXIT_FALSE, _dump(None), "no structure found (this does not prove absence)\n")
    return CommandResult(EXIT_OK, _dump(chain.to_json()))


def cmd_replay(args) -> CommandResult:
    T = _first(args)
    outcome = embedding.replay(T, _chain(args.chain), args.pattern)
    ok, why = embedding.verify_outcome(T, outcome, args.pattern)
    obj = outcome.to_json()
    obj["verified"] = ok
    return CommandResult(EXIT_OK if ok else EXIT_FALSE, _dump(obj), why + "\n" if why else "")


def cmd_plant(args) -> CommandResult:
    sizes = [int(t) for t in args.sizes.split(",")] if args.sizes else None
    T, chain = embedding.plant_instance(args.pattern, args.case, args.seed, sizes=sizes, lam=args.lam)
    if args.trn_out:
        with open(args.trn_out, "w") as fh:
            fh.write(core.serialize(T) + "\n")
    if args.chain_out:
        with open(args.chain_out, "w") as fh:
            fh.write(_dump(chain.to_json()))
    return CommandResult(EXIT_OK, _dump({"trn1": core.serialize(T), "chain": chain.to_json()}))


def cmd_random(args) -> CommandResult:
    return CommandResult(EXIT_OK, core.serialize(core.random_tournament(args.n, args.seed)) + "\n")


def cmd_export_dot(args) -> CommandResult:
    T = _first(args)
    order = None
    if args.named_ordering:
        name, _, which = args.named_ordering.partition(":")
        key = {k.lower(): k for k, _ in core.NAMED_ORDERINGS}.get(name.lower())
        if key is None or (key, which) not in core.NAMED_ORDERINGS:
            raise UsageError(f"unknown named ordering {args.named_ordering!r}")
        order = list(core.named_ordering(key, which)[0])
    elif args.ordering:
        order = _vertex_list(args.ordering, T.n)
    return CommandResult(EXIT_OK, export_dot(T, order))


# parser ------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ehtour", description="Small-tournament toolkit for the Erdos-Hajnal six-vertex cases.")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    def add(name: str, func: Callable, help: str, inputs: int = 1) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help, description=help)
        p.set_defaults(func=func)
        if inputs >= 1:
            p.add_argument("--file", help="TRN1 file ('-' for stdin)")
            p.add_argument("--named", help="named tournament: " + ", ".join(core.NAMES))
        if inputs >= 2:
            p.add_argument("--file2", help="second TRN1 file")
            p.add_argument("--named2", help="second named tournament")
        return p

    p = add("enumerate", cmd_enumerate, "list isomorphism classes on n vertices", 0)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--format", choices=("trn", "jsonl"), default="trn")
    p.add_argument("--method", choices=("orderly", "labeled"), default="orderly")
    p.add_argument("--jobs", type=int, default=1)

    p = add("canon", cmd_canon, "canonical form (TRN1, or JSON with the relabelling)")
    p.add_argument("--json", action="store_true")

    add("iso", cmd_iso, "isomorphism test with a witness map", 2)
    add("contains", cmd_contains, "does the first tournament contain the second?", 2)
    add("tr", cmd_tr, "largest transitive subtournament")
    add("homog", cmd_homog, "a nontrivial homogeneous set (exit 1 if prime)")
    add("galaxy", cmd_galaxy, "a galaxy ordering (exit 1 if none)")
    p = add("forest-count", cmd_forest_count, "number of orderings with a forest of backward edges")
    p.add_argument("--list", action="store_true")

    p = add("classify6", cmd_classify6, "six-vertex outcome classification")
    p.add_argument("--all", action="store_true", help="classify all 56 classes")
    p.add_argument("--report", help="write JSON lines here")
    p.add_argument("--jobs", type=int, default=1)

    p = add("verify-lemma22", cmd_verify_lemma22, "classify every six-vertex class and re-check witnesses", 0)
    p.add_argument("--report")
    p.add_argument("--jobs", type=int, default=1)

    p = add("density", cmd_density, "forward density d(X, Y)")
    p.add_argument("--x", required=True, help="1-based vertex list, e.g. 1,2,3")
    p.add_argument("--y", required=True)

    p = add("critical", cmd_critical, "epsilon-criticality test (n <= 20)")
    p.add_argument("--eps", type=_fraction, required=True, help="rational, e.g. 1/2")

    p = add("verify-structure", cmd_verify_structure, "check a chain structure")
    p.add_argument("--chain", required=True, help="chain structure JSON")
    p.add_argument("--smooth", action="store_true")

    p = add("refine", cmd_refine, "smooth refinement of a chain structure")
    p.add_argument("--chain", required=True)

    p = add("match", cmd_match, "backward matching from Y to X, or a complete pair")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--m", type=int, required=True)

    p = add("merge", cmd_merge, "merge certificate for a bulk set and a transitive set")
    p.add_argument("--bulk", required=True)
    p.add_argument("--transitive", required=True)

    p = add("find-structure", cmd_find_structure, "heuristic structure search")
    p.add_argument("--w", required=True, help="0/1 vector, e.g. 0,0,1,0,0,0")
    p.add_argument("--c", type=_fraction, required=True)
    p.add_argument("--lam", type=_fraction, required=True)

    p = add("replay", cmd_replay, "replay the L1/L2 case analysis")
    p.add_argument("--chain", required=True)
    p.add_argument("--pattern", required=True, choices=("L1", "L2"))

    p = add("plant", cmd_plant, "planted host and chain for a replay case", 0)
    p.add_argument("--pattern", required=True, choices=("L1", "L2"))
    p.add_argument("--case", required=True, choices=embedding.CASES)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--sizes", help="comma-separated set sizes")
    p.add_argument("--lam", type=_fraction, default=embedding.LAMBDA_MAX)
    p.add_argument("--trn-out")
    p.add_argument("--chain-out")

    p = add("random", cmd_random, "uniform random tournament (TRN1)", 0)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)

    p = add("export-dot", cmd_export_dot, "Graphviz DOT, optionally laid out along an ordering")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--ordering", help="1-based vertex order")
    g.add_argument("--named-ordering", help="e.g. K6:canonical, L2:forest, L1:cyclic")
    return parser


def run(argv: Sequence[str]) -> CommandResult:
    parser = build_parser()
    out, err = io.StringIO(), io.StringIO()
    try:
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            args = parser.parse_args(list(argv))
    except UsageError as exc:
        return CommandResult(EXIT_USAGE, "", f"{exc}\n")
    except SystemExit as exc:  # --help
        return CommandResult(int(exc.code or 0), out.getvalue(), err.getvalue())
    try:
        return args.func(args)
    except UsageError as exc:
        return CommandResult(EXIT_USAGE, "", f"ehtour {args.command}: {exc}\n")
    except (TournamentError, regularity.StructureError, embedding.ReplayError, ValueError, OSError) as exc:
        return CommandResult(EXIT_USAGE, "", f"ehtour {args.command}: error: {exc}\n")


def main(argv: Sequence[str] | None = None) -> int:
    result = run(sys.argv[1:] if argv is None else argv)
    sys.stdout.write(result.stdout)
    sys.stderr.write(result.stderr)
    return result.code


if __name__ == "__main__":
    sys.exit(main())
