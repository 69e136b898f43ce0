from __future__ import annotations

import json
import re
import subprocess
import sys


from ehtour import core
from ehtour.cli import export_dot, run


def ok_json(argv):
    res = run(argv)
    assert res.code == 0, res.stderr
    return json.loads(res.stdout)


def test_enumerate_jsonl():
    res = run(["enumerate", "--n", "6", "--format", "jsonl"])
    assert res.code == 0
    rows = [json.loads(line) for line in res.stdout.splitlines()]
    assert len(rows) == 56 and rows[0] == {"n": 6, "bits": rows[0]["bits"], "index": 0}
    labeled = run(["enumerate", "--n", "5", "--method", "labeled"])
    orderly = run(["enumerate", "--n", "5"])
    assert labeled.stdout == orderly.stdout
    assert orderly.stdout.count("\n") == 24


def test_enumerate_parallel_identical():
    assert run(["enumerate", "--n", "6", "--jobs", "2"]).stdout == run(["enumerate", "--n", "6"]).stdout


def test_classify6_all_report(tmp_path):
    report = tmp_path / "out.jsonl"
    res = run(["classify6", "--all", "--report", str(report)])
    assert res.code == 0
    rows = [json.loads(line) for line in report.read_text().splitlines()]
    assert len(rows) == 56 and all(r["outcomes"] for r in rows)


def test_classify6_single():
    assert ok_json(["classify6", "--named", "K6"])["outcomes"] == [5]
    assert run(["classify6", "--named", "C5"]).code == 2


def test_verify_lemma22():
    obj = ok_json(["verify-lemma22"])
    assert obj["classes"] == 56 and obj["all_nonempty"] and obj["witnesses_ok"]


def test_forest_count_k6():
    # all-permutations count; see the acceptance suite for the one-ordering claim
    assert ok_json(["forest-count", "--named", "k6"]) == {"count": 24}
    assert len(ok_json(["forest-count", "--named", "C5", "--list"])["orderings"]) == 20


def test_negative_answers_exit_1():
    assert run(["galaxy", "--named", "C5"]).code == 1
    assert run(["homog", "--named", "K6"]).code == 1
    assert run(["iso", "--named", "L1", "--named2", "L1c"]).code == 1
    assert run(["contains", "--named", "C5", "--named2", "K6"]).code == 1
    assert run(["critical", "--named", "C5", "--eps", "1/2"]).code == 1


def test_positive_answers():
    assert ok_json(["iso", "--named", "K6", "--named2", "K6c"])["isomorphic"]
    emb = ok_json(["contains", "--named", "L2", "--named2", "C5"])
    assert len(emb["map"]) == 5
    assert ok_json(["tr", "--named", "C5"])["tr"] == 3
    assert ok_json(["density", "--named", "C5", "--x", "1,2", "--y", "3,4"])["density"] == "3/4"


def test_file_input(tmp_path):
    p = tmp_path / "t.trn"
    p.write_text("3\n101\n")
    assert run(["canon", "--file", str(p)]).stdout == "3\n010\n"
    assert ok_json(["canon", "--file", str(p), "--json"])["bits"] == "010"
    assert ok_json(["critical", "--file", str(p), "--eps", "2/3"])["critical"]
    bad = tmp_path / "bad.trn"
    bad.write_text("3\n10\n")
    assert run(["canon", "--file", str(bad)]).code == 2


def test_usage_errors():
    assert run([]).code == 2
    assert run(["bogus"]).code == 2
    res = run(["tr"])
    assert res.code == 2 and res.stdout == "" and "required" in res.stderr
    assert run(["tr", "--named", "K6", "--file", "x"]).code == 2
    assert run(["random", "--n", "5"]).code == 2  # seed is mandatory
    assert run(["critical", "--named", "C5", "--eps", "abc"]).code == 2
    assert run(["density", "--named", "C5", "--x", "1,9", "--y", "2"]).code == 2
    assert run(["--help"]).code == 0


def test_random_and_tr_large():
    res = run(["random", "--n", "30", "--seed", "4"])
    assert res.code == 0 and res.stdout == core.serialize(core.random_tournament(30, 4)) + "\n"


def test_structure_commands(tmp_path):
    trn, chain = tmp_path / "h.trn", tmp_path / "c.json"
    planted = ok_json(["plant", "--pattern", "L2", "--case", "BOTH", "--seed", "1",
                       "--trn-out", str(trn), "--chain-out", str(chain)])
    assert planted["chain"]["w"] == [0, 0, 1, 0, 0, 0]
    assert ok_json(["verify-structure", "--file", str(trn), "--chain", str(chain), "--smooth"])["ok"]
    rep = ok_json(["replay", "--file", str(trn), "--chain", str(chain), "--pattern", "L2"])
    assert rep["outcome"] == "embedding" and rep["verified"]
    assert rep["trace"] == ["trim", "split", "match", "pick-j", "case-BOTH", "forest-assemble"]
    found = ok_json(["find-structure", "--file", str(trn), "--w", "0,0,1,0,0,0", "--c", planted["chain"]["c"],
                     "--lam", "1/12"])
    assert len(found["sets"]) == 6


def test_refine_rejects_lambda_overflow(tmp_path):
    # 4 k lambda0 = 4 * 6 / 12 >= 1
    trn, chain = tmp_path / "h.trn", tmp_path / "c.json"
    run(["plant", "--pattern", "L2", "--case", "BOTH", "--seed", "1", "--trn-out", str(trn), "--chain-out", str(chain)])
    res = run(["refine", "--file", str(trn), "--chain", str(chain)])
    assert res.code == 2 and "lambda" in res.stderr


def test_refine_command(tmp_path):
    trn, chain = tmp_path / "h.trn", tmp_path / "c.json"
    trn.write_text(core.serialize(core.Tournament.transitive(8)) + "\n")
    chain.write_text(json.dumps({"w": [0, 1], "c": "1/2", "lambda": "1/10", "sets": [[1, 2, 3, 4], [5, 6, 7, 8]]}))
    refined = ok_json(["refine", "--file", str(trn), "--chain", str(chain)])
    assert refined == {"w": [0, 1], "c": "1/4", "lambda": "4/5", "sets": [[1, 2, 3, 4], [5, 6, 7, 8]]}
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    assert run(["refine", "--file", str(trn), "--chain", str(bad)]).code == 2


def test_homog_stdin(monkeypatch):
    import io

    monkeypatch.setattr("sys.stdin", io.StringIO("3\n111\n"))
    assert ok_json(["homog", "--file", "-"])["set"] == [1, 2]


def test_match_and_merge():
    obj = ok_json(["match", "--named", "C5", "--x", "1,2", "--y", "4,5", "--m", "2"])
    assert obj["matching"] and len(obj["pairs"]) == 2
    obj = ok_json(["match", "--named", "C5", "--x", "1", "--y", "2,3", "--m", "1"])
    assert not obj["matching"] and obj["complete_pair"] == [[1], [2, 3]]
    merged = ok_json(["merge", "--named", "C5", "--bulk", "1", "--transitive", "2,3"])
    assert merged["ok"] and merged["merged"] == [1, 2, 3]
    assert run(["merge", "--named", "C5", "--bulk", "1", "--transitive", "2,4"]).code == 2


def test_find_structure_none():
    res = run(["find-structure", "--named", "C5", "--w", "0", "--c", "2", "--lam", "1/4"])
    assert res.code == 1 and res.stdout.strip() == "null"


# DOT -----------------------------------------------------------------------------------------


def _dot_edges(text):
    return re.findall(r"v(\d+) -> v(\d+)( \[[^\]]*\])?;", text)


def test_dot_k6_canonical():
    order, _ = core.named_ordering("K6", "canonical")
    text = export_dot(core.named("K6"), order)
    assert text.startswith("digraph T {") and text.rstrip().endswith("}")
    marked = [e for e in _dot_edges(text) if 'class="backward"' in e[2]]
    assert sorted((int(a), int(b)) for a, b, _ in marked) == [(4, 1), (5, 2), (6, 1), (6, 3)]
    assert len(_dot_edges(text)) == 15


def test_dot_transitive_and_plain():
    T = core.Tournament.transitive(3)
    assert 'class="backward"' not in export_dot(T, [0, 1, 2])
    text = export_dot(core.named("C5"))
    assert len(_dot_edges(text)) == 10
    assert len(re.findall(r"^\s*v\d+ \[label", text, re.M)) == 5


def test_dot_cli():
    res = run(["export-dot", "--named", "L2", "--named-ordering", "L2:forest"])
    assert res.code == 0 and res.stdout.count('class="backward"') == 4
    assert run(["export-dot", "--named", "L2", "--named-ordering", "L9:forest"]).code == 2
    res = run(["export-dot", "--named", "C5", "--ordering", "5,4,3,2,1"])
    assert res.code == 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ehtour", "tr", "--named", "K6"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["tr"] == 3
