from __future__ import annotations

import json
from pathlib import Path

import pytest
from hypothesis import given

from conftest import deployable_instances
from oracles import random_order_vector
from monotone_priority.block import TransactionBatch
from monotone_priority.call_graph import CallGraph, ParentMap
from monotone_priority.cli import main
from monotone_priority.fixtures import FIXTURE_NAMES
from monotone_priority.io import (
    GraphDocument,
    SchemaError,
    batch_to_json,
    graph_to_json,
    orders_to_json,
    parse_batch,
    parse_graph,
    parse_orders,
)

SAMPLES = Path(__file__).resolve().parent.parent / "samples"
BOOK = str(SAMPLES / "orderbook.json")
BOOK_ORDERS = str(SAMPLES / "orderbook_orders.json")
BOOK_BATCH = str(SAMPLES / "orderbook_batch.json")


def _graph(calls, contracts, lambda_max=None):
    obj = {"contracts": contracts, "calls": calls}
    if lambda_max is not None:
        obj["lambda_max"] = lambda_max
    return obj


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


# -- schema ------------------------------------------------------------------

def test_graph_field_order_and_defaults():
    doc = parse_graph(_graph([{"id": "a", "contract": "A", "refs": []}], ["A"]))
    assert doc.lambda_max == 0 and doc.priorities == {}
    out = graph_to_json(doc)
    assert list(out) == ["lambda_max", "contracts", "calls"]
    assert list(out["calls"][0]) == ["id", "contract", "refs", "priority"]
    assert out["calls"][0]["priority"] is None


@pytest.mark.parametrize("obj", [
    [],
    {"contracts": ["A"]},
    {"contracts": ["A"], "calls": [], "extra": 1},
    {"contracts": ["A"], "calls": [], "lambda_max": "0"},
    {"contracts": ["A"], "calls": [], "lambda_max": True},
    {"contracts": "A", "calls": []},
    _graph([{"id": "a", "contract": "A", "refs": [], "gas": 1}], ["A"]),
    _graph([{"id": "a", "contract": "A", "refs": [], "priority": 1.5}], ["A"]),
    _graph([{"id": "a", "contract": "A", "refs": "b"}], ["A"]),
    _graph([{"id": "a", "contract": "A", "refs": []}] * 2, ["A"]),
    _graph([{"id": "a", "contract": "A", "refs": ["zz"]}], ["A"]),
    _graph([{"id": "a", "contract": "B", "refs": []}], ["A"]),
])
def test_graph_rejections(obj):
    with pytest.raises(SchemaError):
        parse_graph(obj)


def test_orders_and_batch_rejections():
    pm = ParentMap({"a": "A", "b": "A"})
    for bad in ({}, {"orders": []}, {"orders": {"Z": []}}, {"orders": {"A": [["a"]]}},
                {"orders": {"A": [["a", "b"], ["b", "a"]]}}, {"orders": {}, "x": 1}):
        with pytest.raises(SchemaError):
            parse_orders(bad, pm)
    for bad in ({}, {"txs": {}}, {"txs": [{"id": "t"}]}, {"txs": [{"id": "t", "root": 1}]},
                {"txs": [{"id": "t", "root": "a", "fee": 3}]},
                {"txs": [{"id": "t", "root": "a"}, {"id": "t", "root": "b"}]}):
        with pytest.raises(SchemaError):
            parse_batch(bad)


@given(deployable_instances(max_calls=8, max_contracts=4))
def test_round_trips(inst):
    g, pm, rng = inst
    prios = {c: rng.randint(-5, 0) for c in g.calls if rng.random() < 0.7}
    doc = GraphDocument(g, pm, rng.randint(-3, 3), prios)
    back = parse_graph(json.loads(json.dumps(graph_to_json(doc))))
    assert graph_to_json(back) == graph_to_json(doc)
    ov = random_order_vector(rng, g, pm)
    assert parse_orders(orders_to_json(ov), pm) == ov
    batch = TransactionBatch.of((f"t{i}", rng.choice(g.calls)) for i in range(rng.randint(0, 5)))
    assert parse_batch(batch_to_json(batch)) == batch


# -- cli ---------------------------------------------------------------------

def test_validate(tmp_path, capsys):
    assert main(["validate", BOOK]) == 0
    assert capsys.readouterr().out == "valid\n"
    doc = json.loads(Path(BOOK).read_text())
    doc["calls"][0]["priority"] = -99
    assert main(["validate", _write(tmp_path, "bad.json", doc)]) == 1
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("invalid")
    assert json.loads(out[1])["kind"] == "edge"
    # raising the cap does not rescue an edge violation, but lowering it breaks a valid file
    assert main(["validate", BOOK, "--lambda-max", "-101"]) == 1


def test_input_errors_exit_2(tmp_path, capsys):
    assert main(["validate", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "broken.json"
    bad.write_text("{not json")
    assert main(["validate", str(bad)]) == 2
    assert main(["validate", _write(tmp_path, "x.json", {"contracts": [], "calls": [], "v": 1})]) == 2
    no_prio = _write(tmp_path, "np.json", _graph([{"id": "a", "contract": "A", "refs": []}], ["A"]))
    assert main(["validate", no_prio]) == 2
    assert main(["trace", BOOK, "nope"]) == 2
    assert main(["order", BOOK, BOOK_BATCH, "--tau", "random"]) == 2
    assert main(["check-axioms", "--fixture", "no-such"]) == 2
    assert main(["check-axioms", "--fixture", "all", "--max-seq-len", "7"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_synthesize_is_deterministic(tmp_path, capsys):
    out1, out2 = tmp_path / "o1.json", tmp_path / "o2.json"
    assert main(["synthesize", BOOK, "--orders", BOOK_ORDERS, "-o", str(out1)]) == 0
    assert main(["synthesize", BOOK, "--orders", BOOK_ORDERS, "-o", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    got = {c["id"]: c["priority"] for c in json.loads(out1.read_text())["calls"]}
    assert got == {"a": -1, "b": -2, "c": -1}
    assert main(["validate", str(out1)]) == 0
    assert main(["synthesize", BOOK, "--lambda-max", "5"]) == 0
    doc = json.loads(capsys.readouterr().out.split("valid\n")[-1])
    assert doc["lambda_max"] == 5 and max(c["priority"] for c in doc["calls"]) <= 5


def test_synthesize_failures(tmp_path, capsys):
    g = _graph([{"id": "a", "contract": "x", "refs": ["b"]}, {"id": "b", "contract": "x", "refs": []}], ["x"])
    gp = _write(tmp_path, "g.json", g)
    assert main(["synthesize", gp, "--orders", _write(tmp_path, "o.json", {"orders": {"x": [["a", "b"]]}})]) == 1
    cyc = _graph([{"id": "a", "contract": "A", "refs": ["b"]}, {"id": "b", "contract": "B", "refs": ["a"]}], ["A", "B"])
    assert main(["synthesize", _write(tmp_path, "c.json", cyc)]) == 1
    refs = {"a": ["d"], "b": [], "c": ["b"], "d": []}
    unsat = _graph([{"id": k, "contract": "x", "refs": v} for k, v in refs.items()], ["x"])
    o = _write(tmp_path, "u.json", {"orders": {"x": [["a", "b"], ["c", "d"]]}})
    assert main(["synthesize", _write(tmp_path, "u_g.json", unsat), "--orders", o]) == 1
    capsys.readouterr()


def test_order_command(tmp_path, capsys):
    assert main(["order", BOOK, BOOK_BATCH]) == 0
    assert capsys.readouterr().out.split() == ["cancel-1", "release-1", "fill-1"]
    assert main(["order", BOOK, BOOK_BATCH, "--json", "--max-count", "2"]) == 0
    assert json.loads(capsys.readouterr().out) == ["cancel-1", "release-1"]
    # cancel-1 (a) and release-1 (c) tie at -100; lex and an explicit permutation reorder them
    assert main(["order", BOOK, BOOK_BATCH, "--tau", "lex", "--json"]) == 0
    assert json.loads(capsys.readouterr().out) == ["cancel-1", "release-1", "fill-1"]
    perm = _write(tmp_path, "perm.json", [0, 2, 1])
    assert main(["order", BOOK, BOOK_BATCH, "--tau", f"file:{perm}", "--json"]) == 0
    assert json.loads(capsys.readouterr().out) == ["release-1", "cancel-1", "fill-1"]
    stray = _write(tmp_path, "b.json", {"txs": [{"id": "t", "root": "ghost"}]})
    assert main(["order", BOOK, stray]) == 2
    assert main(["order", BOOK, BOOK_BATCH, "--tau", f"file:{_write(tmp_path, 'p.json', [0, 0, 1])}"]) == 2
    capsys.readouterr()


def test_trace_command(capsys):
    assert main(["trace", BOOK, "a"]) == 0
    assert capsys.readouterr().out.split() == ["c"]
    assert main(["trace", BOOK, "b"]) == 0
    assert capsys.readouterr().out == ""


def test_check_axioms_fixtures(tmp_path, capsys):
    fig = tmp_path / "matrix.png"
    assert main(["check-axioms", "--fixture", "all", "--figure", str(fig)]) == 1
    lines = [json.loads(s) for s in capsys.readouterr().out.splitlines()]
    assert len(lines) == 5 * len(FIXTURE_NAMES)
    failing = {(r["system"], r["axiom"]) for r in lines if r["verdict"] == "fail"}
    assert failing == {(n, n.removeprefix("no-")) for n in FIXTURE_NAMES}
    assert all(r["witness"] for r in lines if r["verdict"] == "fail")
    assert fig.stat().st_size > 0
    assert main(["check-axioms", "--fixture", "no-iic", "--format", "table"]) == 1
    table = capsys.readouterr().out.splitlines()
    assert "fail" in table[1] and len(table) == 2


def test_check_axioms_graph(tmp_path, capsys):
    assert main(["check-axioms", "--graph", BOOK, "--orders", BOOK_ORDERS]) == 0
    rows = [json.loads(s) for s in capsys.readouterr().out.splitlines()]
    assert {r["system"] for r in rows} == {"induced", "declared"}
    assert all(r["verdict"] == "pass" for r in rows)
    assert main(["check-axioms", "--graph", BOOK, "--max-calls", "2"]) == 2
    assert main(["check-axioms", "--graph", BOOK, "--max-contracts", "1"]) == 2
    assert main(["check-axioms", "--fixture", "all", "--orders", BOOK_ORDERS]) == 2
    capsys.readouterr()


def test_declared_orders_can_break_extension(tmp_path, capsys):
    # the literal-admissible order a>b leaves sibling c (which calls b) unranked
    g = _graph([{"id": k, "contract": "x", "refs": v} for k, v in {"a": [], "b": [], "c": ["b"]}.items()], ["x"])
    o = _write(tmp_path, "o.json", {"orders": {"x": [["a", "b"]]}})
    assert main(["check-axioms", "--graph", _write(tmp_path, "g.json", g), "--orders", o]) == 1
    rows = [json.loads(s) for s in capsys.readouterr().out.splitlines()]
    bad = [r for r in rows if r["verdict"] == "fail"]
    assert [(r["system"], r["axiom"]) for r in bad] == [("declared", "extension")]
    assert bad[0]["witness"]["caller"] == "c"


def test_fixture_commands(capsys):
    assert main(["fixture", "list"]) == 0
    listed = [line.split("\t")[0] for line in capsys.readouterr().out.splitlines()]
    assert listed == list(FIXTURE_NAMES)
    assert main(["fixture", "show", "no-existence"]) == 0
    doc = parse_graph(json.loads(capsys.readouterr().out))
    assert set(doc.graph.calls) == {"a", "a'", "b"}
    assert main(["fixture", "show", "no-priority", "--family"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 1
    assert main(["fixture", "show", "bogus"]) == 2
    capsys.readouterr()


def test_figures(tmp_path, capsys):
    v = tmp_path / "v.png"
    s = tmp_path / "s.png"
    assert main(["validate", BOOK, "--figure", str(v)]) == 0
    assert main(["synthesize", BOOK, "-o", str(tmp_path / "g.json"), "--figure", str(s)]) == 0
    for p in (v, s):
        assert p.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    capsys.readouterr()


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "monotone_priority", "trace", BOOK, "a"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.split() == ["c"]


def test_samples_parse():
    doc = parse_graph(json.loads(Path(BOOK).read_text()))
    assert doc.graph.as_dict() == CallGraph({"a": ["c"], "b": [], "c": []}).as_dict()
    assert doc.parent.contracts == ("escrow", "book")
