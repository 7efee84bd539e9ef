"""JSON documents for graphs, order vectors and transaction batches.

Graph document::

    {"lambda_max": 0, "contracts": ["A", "B"],
     "calls": [{"id": "a", "contract": "A", "refs": ["b"], "priority": -1}, ...]}

Orders document: ``{"orders": {"A": [["a", "b"], ...]}}`` with generator
pairs only. Batch document: ``{"txs": [{"id": "t1", "root": "a"}, ...]}``.
Unknown fields are rejected everywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .block import Transaction, TransactionBatch
from .call_graph import CallGraph, GraphError, ParentMap
from .priority import DEFAULT_LAMBDA_MAX, PriorityMap
from .rights import OrderError, OrderVector


class SchemaError(ValueError):
    pass


@dataclass
class GraphDocument:
    graph: CallGraph
    parent: ParentMap
    lambda_max: int = DEFAULT_LAMBDA_MAX
    priorities: dict[str, int] = field(default_factory=dict)

    def priority_map(self) -> PriorityMap:
        return PriorityMap(dict(self.priorities), self.lambda_max)

    def with_priorities(self, pmap: PriorityMap) -> GraphDocument:
        return GraphDocument(self.graph, self.parent, pmap.lambda_max, dict(pmap.priorities))


def _expect(cond: bool, msg: str) -> None:
    if not cond:
        raise SchemaError(msg)


def _check_keys(obj: Any, required: set[str], optional: set[str], where: str) -> None:
    _expect(isinstance(obj, dict), f"{where}: expected an object")
    unknown = set(obj) - required - optional
    _expect(not unknown, f"{where}: unknown field(s) {sorted(unknown)}")
    missing = required - set(obj)
    _expect(not missing, f"{where}: missing field(s) {sorted(missing)}")


def _is_int(v: Any) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def parse_graph(obj: Any) -> GraphDocument:
    _check_keys(obj, {"contracts", "calls"}, {"lambda_max"}, "graph")
    lambda_max = obj.get("lambda_max", DEFAULT_LAMBDA_MAX)
    _expect(_is_int(lambda_max), "graph: lambda_max must be an integer")
    contracts = obj["contracts"]
    _expect(isinstance(contracts, list) and all(isinstance(x, str) for x in contracts),
            "graph: contracts must be a list of strings")
    _expect(isinstance(obj["calls"], list), "graph: calls must be a list")
    refs: dict[str, list[str]] = {}
    parent: dict[str, str] = {}
    priorities: dict[str, int] = {}
    for i, call in enumerate(obj["calls"]):
        where = f"graph.calls[{i}]"
        _check_keys(call, {"id", "contract", "refs"}, {"priority"}, where)
        cid = call["id"]
        _expect(isinstance(cid, str) and cid, f"{where}: id must be a non-empty string")
        _expect(cid not in refs, f"{where}: duplicate call id {cid!r}")
        _expect(isinstance(call["contract"], str), f"{where}: contract must be a string")
        _expect(isinstance(call["refs"], list) and all(isinstance(r, str) for r in call["refs"]),
                f"{where}: refs must be a list of strings")
        refs[cid] = list(call["refs"])
        parent[cid] = call["contract"]
        p = call.get("priority")
        if p is not None:
            _expect(_is_int(p), f"{where}: priority must be an integer or null")
            priorities[cid] = p
    try:
        graph = CallGraph(refs)
        pm = ParentMap(parent, contracts)
    except GraphError as exc:
        raise SchemaError(str(exc)) from exc
    return GraphDocument(graph, pm, lambda_max, priorities)


def graph_to_json(doc: GraphDocument) -> dict:
    calls = []
    for c in doc.graph.calls:
        calls.append({
            "id": c,
            "contract": doc.parent[c],
            "refs": list(doc.graph.refs(c)),
            "priority": doc.priorities.get(c),
        })
    return {"lambda_max": doc.lambda_max, "contracts": list(doc.parent.contracts), "calls": calls}


def parse_orders(obj: Any, pm: ParentMap) -> OrderVector:
    _check_keys(obj, {"orders"}, set(), "orders")
    orders = obj["orders"]
    _expect(isinstance(orders, dict), "orders: expected an object keyed by contract")
    pairs = {}
    for x, ps in orders.items():
        _expect(x in pm.contracts, f"orders: unknown contract {x!r}")
        _expect(isinstance(ps, list) and all(
            isinstance(p, list) and len(p) == 2 and all(isinstance(c, str) for c in p) for p in ps),
            f"orders.{x}: expected a list of [greater, lesser] pairs")
        pairs[x] = [tuple(p) for p in ps]
    try:
        return OrderVector.from_pairs(pm, pairs)
    except OrderError as exc:
        raise SchemaError(str(exc)) from exc


def orders_to_json(ov: OrderVector) -> dict:
    return {"orders": {x: [list(p) for p in gens] for x, gens in ov.generators().items()}}


def parse_batch(obj: Any) -> TransactionBatch:
    _check_keys(obj, {"txs"}, set(), "batch")
    _expect(isinstance(obj["txs"], list), "batch: txs must be a list")
    txs = []
    for i, t in enumerate(obj["txs"]):
        _check_keys(t, {"id", "root"}, set(), f"batch.txs[{i}]")
        _expect(isinstance(t["id"], str) and isinstance(t["root"], str), f"batch.txs[{i}]: id and root must be strings")
        txs.append(Transaction(t["id"], t["root"]))
    try:
        return TransactionBatch(tuple(txs))
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def batch_to_json(batch: TransactionBatch) -> dict:
    return {"txs": [{"id": t.id, "root": t.root} for t in batch.txs]}


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def read_json(path: str | Path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def write_json(path: str | Path, obj: Any) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def load_graph(path: str | Path) -> GraphDocument:
    return parse_graph(read_json(path))


def save_graph(doc: GraphDocument, path: str | Path) -> None:
    write_json(path, graph_to_json(doc))


def load_orders(path: str | Path, pm: ParentMap) -> OrderVector:
    return parse_orders(read_json(path), pm)


def save_orders(ov: OrderVector, path: str | Path) -> None:
    write_json(path, orders_to_json(ov))


def load_batch(path: str | Path) -> TransactionBatch:
    return parse_batch(read_json(path))


def save_batch(batch: TransactionBatch, path: str | Path) -> None:
    write_json(path, batch_to_json(batch))
