"""Command-line entry point: ``mps`` (or ``python3 -m monotone_priority``).

Exit status is 0 on success, 1 when a priority map is invalid, an order
cannot be honoured or an axiom check fails, and 2 on unreadable or
malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .axioms import (
    AXIOMS,
    AxiomReport,
    check_existence,
    check_extension,
    check_priority,
    check_reducibility,
    existence_witness,
    extension_failure,
    iic_reports,
    reducibility_failure,
    induced_system,
)
from .block import BlockError, TieBreaker, build_block
from .call_graph import GraphError, NotDeployable, UnknownCall, deployment_order, trace
from .fixtures import FIXTURE_NAMES, TARGET_AXIOM, load_fixture
from .io import (
    GraphDocument,
    SchemaError,
    dumps,
    graph_to_json,
    load_batch,
    load_graph,
    load_orders,
    read_json,
)
from .priority import MissingPriority, is_valid
from .rights import InadmissibleOrder, OrderError, OrderVector, induce
from .synthesis import UnsatisfiableOrder, synthesize
from .universe import deployable_parent_maps

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _load_doc(args) -> GraphDocument:
    doc = load_graph(args.graph)
    if getattr(args, "lambda_max", None) is not None:
        doc.lambda_max = args.lambda_max
    return doc


def _maybe_priority_figure(args, doc: GraphDocument) -> None:
    if getattr(args, "figure", None):
        from .plotting import priority_figure

        priority_figure(doc.graph, doc.parent, doc.priorities, args.figure, doc.lambda_max)


def cmd_validate(args) -> int:
    doc = _load_doc(args)
    validity = is_valid(doc.priority_map(), doc.graph)
    _maybe_priority_figure(args, doc)
    if validity:
        print("valid")
        return EXIT_OK
    v = validity.violation
    print(f"invalid: {v.describe()}")
    print(json.dumps({"kind": v.kind, "call": v.call, "ref": v.ref, "priority": v.priority, "bound": v.bound}))
    return EXIT_FAIL


def cmd_synthesize(args) -> int:
    doc = _load_doc(args)
    ov = load_orders(args.orders, doc.parent) if args.orders else OrderVector.empty(doc.parent)
    try:
        pmap = synthesize(doc.graph, doc.parent, ov, doc.lambda_max)
    except (NotDeployable, InadmissibleOrder, UnsatisfiableOrder) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    out = doc.with_priorities(pmap)
    text = dumps(graph_to_json(out))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    _maybe_priority_figure(args, out)
    return EXIT_OK


def _parse_tau(value: str) -> TieBreaker:
    if value in ("input", "lex"):
        return TieBreaker(value)
    if value.startswith("file:"):
        perm = read_json(value[len("file:"):])
        if not isinstance(perm, list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in perm):
            raise SchemaError("tie-breaker file must hold a JSON list of integers")
        return TieBreaker.explicit(perm)
    raise InputError(f"unknown tie-breaker {value!r}; use input, lex or file:<path>")


def cmd_order(args) -> int:
    doc = _load_doc(args)
    batch = load_batch(args.batch)
    tau = _parse_tau(args.tau)
    for t in batch.txs:
        if t.root not in doc.graph:
            raise UnknownCall(t.root)
    ordering = build_block(batch, doc.priority_map(), tau)
    if args.max_count is not None:
        if args.max_count < 0:
            raise InputError("--max-count must be non-negative")
        ordering = ordering[:args.max_count]
    if args.json:
        print(json.dumps(ordering))
    else:
        for tid in ordering:
            print(tid)
    return EXIT_OK


def cmd_trace(args) -> int:
    doc = load_graph(args.graph)
    for c in trace(doc.graph, args.call):
        print(c)
    return EXIT_OK


def _declared_reports(g, pm, ov, max_len: int) -> list[AxiomReport]:
    # per-vector axioms evaluated on the single vector the orders induce
    v = induce(g, pm, ov)
    rel = v.to_json()
    seq = existence_witness(v, g.calls, max_len)
    ext = extension_failure(v, g)
    red = reducibility_failure(v, g, pm)
    pm_json = dict(sorted(pm.as_dict().items()))
    return [
        AxiomReport("existence", seq is None,
                    None if seq is None else {"parent_map": pm_json, "relations": rel, "sequence": seq}, 1),
        AxiomReport("extension", ext is None, None if ext is None else {
            "parent_map": pm_json, "relations": rel, "contract": ext[0], "above": ext[1],
            "below": ext[2], "caller": ext[3]}, 1),
        AxiomReport("reducibility", red is None, None if red is None else {
            "parent_map": pm_json, "relations": rel, "contract": red[0], "above": red[1], "below": red[2]}, 1),
    ]


def _graph_reports(args) -> list[tuple[str, list[AxiomReport]]]:
    doc = load_graph(args.graph)
    g, pm = doc.graph, doc.parent
    if len(g) > args.max_calls:
        raise InputError(f"graph has {len(g)} calls; exhaustive checks are bounded by --max-calls {args.max_calls}")
    if len(pm.contracts) > args.max_contracts:
        raise InputError(f"graph has {len(pm.contracts)} contracts; bound is --max-contracts {args.max_contracts}")
    deployment_order(g, pm)
    pms = deployable_parent_maps(g, pm.contracts)
    sys_ = induced_system()
    reports = [
        check_existence(sys_, g, pm, args.max_seq_len),
        check_priority(sys_, g, pm),
        check_extension(sys_, g, pm),
        check_reducibility(sys_, g, pm),
        iic_reports(sys_, g, pms, anchors=[pm])[0],
    ]
    rows = [(sys_.name, reports)]
    if args.orders:
        ov = load_orders(args.orders, pm)
        rows.append(("declared", _declared_reports(g, pm, ov, args.max_seq_len)))
    return rows


def _fixture_reports(name: str, max_len: int) -> list[AxiomReport]:
    fx = load_fixture(name)
    pms = deployable_parent_maps(fx.graph, fx.contracts)
    return [
        check_existence(fx.system, fx.graph, fx.home, max_len),
        check_priority(fx.system, fx.graph, fx.home),
        check_extension(fx.system, fx.graph, fx.home),
        check_reducibility(fx.system, fx.graph, fx.home),
        iic_reports(fx.system, fx.graph, pms, anchors=[fx.home])[0],
    ]


def cmd_check_axioms(args) -> int:
    if args.max_seq_len > 6:
        raise InputError("--max-seq-len above 6 is not supported")
    if args.fixture:
        names = FIXTURE_NAMES if args.fixture == "all" else [args.fixture]
        for n in names:
            if n not in FIXTURE_NAMES:
                raise InputError(f"unknown fixture {n!r}; expected one of {', '.join(FIXTURE_NAMES)} or all")
        rows = [(n, _fixture_reports(n, args.max_seq_len)) for n in names]
    else:
        rows = _graph_reports(args)
    if args.format == "table":
        width = max(len(name) for name, _ in rows)
        print(" " * width + "  " + "  ".join(f"{a:>12}" for a in AXIOMS))
        for name, reports in rows:
            verdict = {r.axiom: r.verdict for r in reports}
            print(f"{name:<{width}}  " + "  ".join(f"{verdict.get(a, '-'):>12}" for a in AXIOMS))
    else:
        for name, reports in rows:
            for r in reports:
                print(json.dumps({"system": name, **r.to_json()}))
    if args.figure:
        from .plotting import axiom_matrix_figure

        axiom_matrix_figure(rows, args.figure)
    return EXIT_FAIL if any(not r.passed for _, reports in rows for r in reports) else EXIT_OK


def cmd_fixture(args) -> int:
    if args.fixture_cmd == "list":
        for n in FIXTURE_NAMES:
            fx = load_fixture(n)
            print(f"{n}\t{TARGET_AXIOM[n]}\t{fx.system.description}")
        return EXIT_OK
    if args.name not in FIXTURE_NAMES:
        raise InputError(f"unknown fixture {args.name!r}; expected one of {', '.join(FIXTURE_NAMES)}")
    fx = load_fixture(args.name)
    if args.family:
        for v in fx.system.family(fx.graph, fx.home):
            print(json.dumps(v.to_json()))
    else:
        sys.stdout.write(dumps(graph_to_json(GraphDocument(fx.graph, fx.home))))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mps", description="Monotone priorities for contract call sequencing.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a graph's priorities")
    v.add_argument("graph")
    v.add_argument("--lambda-max", type=int, help="override the file's priority cap")
    v.add_argument("--figure", metavar="PNG", help="also plot the priorities to this file")
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("synthesize", help="fill in priorities respecting declared orders")
    s.add_argument("graph")
    s.add_argument("--orders", help="orders JSON (default: no declared orders)")
    s.add_argument("--lambda-max", type=int)
    s.add_argument("-o", "--output", help="write the graph here instead of stdout")
    s.add_argument("--figure", metavar="PNG")
    s.set_defaults(func=cmd_synthesize)

    o = sub.add_parser("order", help="sequence a batch of transactions")
    o.add_argument("graph")
    o.add_argument("batch")
    o.add_argument("--tau", default="input", help="tie-breaker: input, lex or file:<perm.json>")
    o.add_argument("--lambda-max", type=int)
    o.add_argument("--max-count", type=int, help="keep only the first N transactions after sorting")
    o.add_argument("--json", action="store_true", help="print a JSON list instead of one id per line")
    o.set_defaults(func=cmd_order)

    t = sub.add_parser("trace", help="list every call reachable from a call")
    t.add_argument("graph")
    t.add_argument("call")
    t.set_defaults(func=cmd_trace)

    c = sub.add_parser("check-axioms", help="run the five axiom checks")
    src = c.add_mutually_exclusive_group(required=True)
    src.add_argument("--fixture", help="fixture name, or 'all'")
    src.add_argument("--graph", help="check the induced system on this graph's parent map")
    c.add_argument("--orders", help="with --graph: also check the vector these orders induce")
    c.add_argument("--max-calls", type=int, default=4)
    c.add_argument("--max-contracts", type=int, default=3)
    c.add_argument("--max-seq-len", type=int, default=4)
    c.add_argument("--format", choices=("jsonl", "table"), default="jsonl")
    c.add_argument("--figure", metavar="PNG", help="also draw the pass/fail matrix")
    c.set_defaults(func=cmd_check_axioms)

    f = sub.add_parser("fixture", help="inspect the counterexample fixtures")
    fsub = f.add_subparsers(dest="fixture_cmd", required=True)
    fsub.add_parser("list")
    show = fsub.add_parser("show")
    show.add_argument("name")
    show.add_argument("--family", action="store_true", help="print the allowed vectors at the home parent map instead of the graph")
    f.set_defaults(func=cmd_fixture)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "orders", None) and getattr(args, "fixture", None):
        print("error: --orders needs --graph", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (NotDeployable, InadmissibleOrder) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (SchemaError, GraphError, OrderError, BlockError, InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (UnknownCall, MissingPriority) as exc:
        kind = "unknown call" if isinstance(exc, UnknownCall) else "no priority for"
        print(f"error: {kind} {exc.args[0]!r}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
