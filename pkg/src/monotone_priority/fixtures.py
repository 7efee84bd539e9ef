"""Five rights systems, each violating exactly one axiom.

Three of them share the universe ``a, a', b`` where ``a'`` calls ``a``; they
start from the induced system and let contract ``B`` add extra pairs. The
priority counterexample allows nothing at all over four isolated calls, and
the extension counterexample allows any per-contract order but no
cross-contract pairs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator

from .axioms import RightsSystem, induced_contract_relations
from .call_graph import CallGraph, ParentMap
from .rights import ConstraintSet, Pair, all_strict_partial_orders, transitive_closure

FIXTURE_NAMES = ("no-existence", "no-priority", "no-extension", "no-reducibility", "no-iic")

TARGET_AXIOM = {
    "no-existence": "existence",
    "no-priority": "priority",
    "no-extension": "extension",
    "no-reducibility": "reducibility",
    "no-iic": "iic",
}


def three_call_graph() -> CallGraph:
    return CallGraph({"a": [], "a'": ["a"], "b": []})


def four_call_graph() -> CallGraph:
    return CallGraph({"a": [], "b": [], "c": [], "d": []})


@dataclass
class Fixture:
    name: str
    system: RightsSystem
    graph: CallGraph
    home: ParentMap  # the parent map the counterexample is built around
    target: str

    @property
    def contracts(self) -> tuple[str, ...]:
        return self.home.contracts


def _with_extension_closure(g: CallGraph, pairs: Iterable[Pair]) -> set[Pair]:
    out = set()
    for c, c2 in pairs:
        out.add((c, c2))
        out.update((c, c3) for c3 in g.calls if c2 in g.trace(c3))
    return out


def _is_strict_order(rel: frozenset[Pair]) -> bool:
    return all(a != b for a, b in rel) and transitive_closure(rel) == rel


def _b_additions(g: CallGraph, base_b: frozenset[Pair], eligible: list[Pair]) -> Iterator[frozenset[Pair]]:
    """Every choice of optional pairs for ``B`` whose result is still a strict partial order.

    Chosen pairs are closed under extension but not under transitivity; a
    choice that is not already transitive is dropped.
    """
    seen = set()
    for r in range(len(eligible) + 1):
        for chosen in itertools.combinations(eligible, r):
            rel = frozenset(set(base_b) | _with_extension_closure(g, chosen))
            if not _is_strict_order(rel):
                continue
            if rel not in seen:
                seen.add(rel)
                yield rel


def _induced_with_b_options(g: CallGraph, pm: ParentMap, eligible: list[Pair]) -> Iterator[ConstraintSet]:
    rel_a = induced_contract_relations(g, pm, "A")
    rel_b = induced_contract_relations(g, pm, "B")
    for ra in rel_a:
        for rb in rel_b:
            for extended in _b_additions(g, rb, eligible):
                yield ConstraintSet({"A": ra, "B": extended})


def _no_existence_family(g: CallGraph, pm: ParentMap) -> Iterator[ConstraintSet]:
    # B may rank any call above one of its own children that does not call it
    eligible = [(c, c2) for c2 in g.calls if pm[c2] == "B"
                for c in g.calls if c != c2 and c not in g.trace(c2)]
    return _induced_with_b_options(g, pm, eligible)


def _no_priority_family(g: CallGraph, pm: ParentMap) -> Iterator[ConstraintSet]:
    yield ConstraintSet({x: frozenset() for x in pm.contracts})


def _no_extension_family(g: CallGraph, pm: ParentMap) -> Iterator[ConstraintSet]:
    per = [list(all_strict_partial_orders(pm.children(x))) for x in pm.contracts]
    for combo in itertools.product(*per):
        yield ConstraintSet(dict(zip(pm.contracts, combo)))


def _no_reducibility_family(g: CallGraph, pm: ParentMap) -> Iterator[ConstraintSet]:
    # B may rank its own child above a foreign call whose trace reaches B
    eligible = [(c, c2) for c in g.calls if pm[c] == "B"
                for c2 in g.calls if pm[c2] != "B" and c not in g.trace(c2)
                and any(pm[d] == "B" for d in g.trace(c2))]
    return _induced_with_b_options(g, pm, eligible)


def _no_iic_family(g: CallGraph, pm: ParentMap) -> Iterator[ConstraintSet]:
    unlocked = pm["b"] == "A" and pm["a"] == "B" and pm["a'"] == "B"
    for ra in induced_contract_relations(g, pm, "A"):
        for rb in induced_contract_relations(g, pm, "B"):
            yield ConstraintSet({"A": ra, "B": rb})
            if unlocked:
                rel = frozenset(rb | {("b", "a"), ("b", "a'")})
                if _is_strict_order(rel):
                    yield ConstraintSet({"A": ra, "B": rel})


_AB = ("A", "B")


def load_fixture(name: str) -> Fixture:
    if name == "no-existence":
        return Fixture(name, RightsSystem(name, _no_existence_family, "B may add pairs above its own children"),
                       three_call_graph(), ParentMap({"a'": "A", "b": "A", "a": "B"}, _AB), TARGET_AXIOM[name])
    if name == "no-priority":
        return Fixture(name, RightsSystem(name, _no_priority_family, "only the empty vector"),
                       four_call_graph(), ParentMap({"a": "A", "b": "A", "c": "B", "d": "B"}, _AB),
                       TARGET_AXIOM[name])
    if name == "no-extension":
        return Fixture(name, RightsSystem(name, _no_extension_family, "within-contract orders only"),
                       three_call_graph(), ParentMap({"a'": "A", "a": "B", "b": "B"}, _AB), TARGET_AXIOM[name])
    if name == "no-reducibility":
        return Fixture(name, RightsSystem(name, _no_reducibility_family, "B may rank its calls above foreign callers"),
                       three_call_graph(), ParentMap({"a'": "A", "a": "B", "b": "B"}, _AB), TARGET_AXIOM[name])
    if name == "no-iic":
        return Fixture(name, RightsSystem(name, _no_iic_family, "extra pairs unlocked by the parent of a'"),
                       three_call_graph(), ParentMap({"b": "A", "a": "B", "a'": "B"}, _AB), TARGET_AXIOM[name])
    raise KeyError(f"unknown fixture {name!r}; expected one of {', '.join(FIXTURE_NAMES)}")
