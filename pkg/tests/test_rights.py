from __future__ import annotations

import itertools

import pytest
from hypothesis import given

from conftest import deployable_instances
from oracles import admissible_oracle, closed_oracle, induce_oracle, random_order_vector
from monotone_priority.call_graph import CallGraph, ParentMap, UnknownContract
from monotone_priority.rights import (
    ConstraintSet,
    InadmissibleOrder,
    OrderError,
    OrderVector,
    StrictPartialOrder,
    all_strict_partial_orders,
    close_under_extension,
    holds,
    induce,
    is_admissible,
    is_closed_admissible,
    transitive_closure,
)


def _single(refs, contract="x"):
    g = CallGraph(refs)
    return g, ParentMap({c: contract for c in refs})


def test_admissible_examples():
    g, pm = _single({"a": [], "b": []})
    assert is_admissible(StrictPartialOrder.from_pairs(["a", "b"], [("a", "b")]), "x", g, pm)
    g, pm = _single({"a": ["b"], "b": []})
    assert not is_admissible(StrictPartialOrder.from_pairs(["a", "b"], [("a", "b")]), "x", g, pm)
    # the reverse ranking is fine: a referenced call may outrank its caller
    assert is_admissible(StrictPartialOrder.from_pairs(["a", "b"], [("b", "a")]), "x", g, pm)


def test_admissible_rejects_wrong_domain():
    g, pm = _single({"a": [], "b": []})
    with pytest.raises(OrderError):
        is_admissible(StrictPartialOrder.empty(["a"]), "x", g, pm)


def test_order_construction_closes_and_rejects_cycles():
    o = StrictPartialOrder.from_pairs("abc", [("a", "b"), ("b", "c")])
    assert o.pairs == {("a", "b"), ("b", "c"), ("a", "c")}
    assert o.generators() == [("a", "b"), ("b", "c")]
    with pytest.raises(OrderError):
        StrictPartialOrder.from_pairs("ab", [("a", "b"), ("b", "a")])
    with pytest.raises(OrderError):
        StrictPartialOrder.from_pairs("ab", [("a", "z")])


def _brute_force_orders(n):
    elems = range(n)
    slots = [(a, b) for a in elems for b in elems if a != b]
    count = 0
    for mask in range(1 << len(slots)):
        rel = {slots[k] for k in range(len(slots)) if mask >> k & 1}
        if transitive_closure(rel) == rel:  # irreflexive by construction, so closure equality means a strict order
            count += 1
    return count


@pytest.mark.parametrize("n", [0, 1, 2, 3, 4])
def test_order_enumeration_counts(n):
    orders = list(all_strict_partial_orders([f"e{i}" for i in range(n)]))
    assert len(orders) == len(set(orders)) == _brute_force_orders(n)
    assert len(orders) == [1, 1, 3, 19, 219][n]


@given(deployable_instances(max_calls=7))
def test_admissibility_matches_pair_scan(inst):
    g, pm, rng = inst
    for x in pm.contracts:
        kids = sorted(pm.children(x))
        pairs = [(a, b) for a, b in itertools.permutations(kids, 2) if rng.random() < 0.3]
        try:
            o = StrictPartialOrder.from_pairs(kids, pairs)
        except OrderError:
            continue
        assert is_admissible(o, x, g, pm) == admissible_oracle(o.pairs, g)
        assert is_closed_admissible(o, x, g, pm) == (admissible_oracle(o.pairs, g) and closed_oracle(o.pairs, kids, g))


def test_induce_worked_scenario():
    # x declares a over b; c2 in another contract references b
    g = CallGraph({"a": ["c"], "b": [], "c": [], "c2": ["b"]})
    pm = ParentMap({"a": "x", "b": "x", "c": "x1", "c2": "x2"}, ["x1", "x", "x2"])
    ov = OrderVector.from_pairs(pm, {"x": [("a", "b")]})
    cs = induce(g, pm, ov)
    assert holds(cs, "x", "a", "b")
    assert holds(cs, "x", "a", "c2")
    assert not holds(cs, "x", "a", "c")
    assert cs["x1"] == frozenset() and cs["x2"] == frozenset()


def test_induce_empty_vector():
    g = CallGraph({"a": ["b"], "b": []})
    pm = ParentMap({"a": "A", "b": "B"})
    cs = induce(g, pm, OrderVector.empty(pm))
    assert all(not r for r in cs.relations.values())


def test_induce_rejects_inadmissible():
    g, pm = _single({"a": ["b"], "b": []})
    ov = OrderVector.from_pairs(pm, {"x": [("a", "b")]})
    with pytest.raises(InadmissibleOrder):
        induce(g, pm, ov)


def test_holds():
    cs = ConstraintSet({"x": frozenset({("a", "b")})})
    assert holds(cs, "x", "a", "b")
    assert not holds(cs, "x", "a", "a")
    assert not holds(cs, "x", "b", "a")
    with pytest.raises(UnknownContract):
        holds(cs, "nope", "a", "b")


@given(deployable_instances(max_calls=8, max_contracts=4))
def test_induce_matches_quadratic_oracle(inst):
    g, pm, rng = inst
    ov = random_order_vector(rng, g, pm)
    cs = induce(g, pm, ov)
    for x in pm.contracts:
        assert cs[x] == induce_oracle(g, pm, x, ov[x].pairs)


@given(deployable_instances(max_calls=10, max_contracts=4))
def test_induced_relations_have_the_rights_properties(inst):
    g, pm, rng = inst
    ov = random_order_vector(rng, g, pm)
    cs = induce(g, pm, ov)
    for x in pm.contracts:
        rel = cs[x]
        kids = pm.children(x)
        # a strict partial order over all calls
        assert all(a != b for a, b in rel)
        assert transitive_closure(rel) == set(rel)
        for c, c2 in rel:
            assert pm[c] == x
            # extension
            for c3 in g.calls:
                if c2 in g.trace(c3):
                    assert (c, c3) in rel
            # reducibility
            if pm[c2] != x:
                assert any(pm[d] == x and (c, d) in rel for d in g.trace(c2))
        assert {(a, b) for a, b in rel if a in kids and b in kids} == set(ov[x].pairs)


def test_literal_admissibility_breaks_extension():
    # a over b is admissible on its own, but sibling c calls b and is not ranked under a
    g, pm = _single({"a": [], "b": [], "c": ["b"]})
    o = StrictPartialOrder.from_pairs("abc", [("a", "b")])
    assert is_admissible(o, "x", g, pm)
    assert not is_closed_admissible(o, "x", g, pm)
    cs = induce(g, pm, OrderVector({"x": o}, pm))
    assert holds(cs, "x", "a", "b") and not holds(cs, "x", "a", "c")
    closed = close_under_extension(o, "x", g, pm)
    assert closed.pairs == {("a", "b"), ("a", "c")}


def test_close_under_extension_can_cycle():
    g, pm = _single({"a": ["d"], "b": [], "c": ["b"], "d": []})
    o = StrictPartialOrder.from_pairs("abcd", [("a", "b"), ("c", "d")])
    assert is_admissible(o, "x", g, pm)
    with pytest.raises(OrderError):
        close_under_extension(o, "x", g, pm)


def test_order_vector_round_trip_and_refines():
    pm = ParentMap({"a": "x", "b": "x", "c": "x"})
    ov = OrderVector.from_pairs(pm, {"x": [("a", "b"), ("b", "c")]})
    assert ov.generators() == {"x": [("a", "b"), ("b", "c")]}
    assert OrderVector.from_pairs(pm, ov.generators()) == ov
    assert ov.refines(OrderVector.from_pairs(pm, {"x": [("a", "c")]}))
    assert not OrderVector.empty(pm).refines(ov)
