"""Enumeration of small call universes and parent maps."""

from __future__ import annotations

import itertools
from typing import Iterator, Sequence

from .call_graph import CallGraph, ContractId, ParentMap, is_deployable


def call_names(n: int) -> list[str]:
    return [f"c{i}" for i in range(n)]


def contract_names(k: int) -> list[str]:
    return [f"X{i}" for i in range(k)]


def reference_graphs(n: int, self_loops: bool = True, up_to_isomorphism: bool = True) -> Iterator[CallGraph]:
    """Every reference relation on ``n`` calls, optionally one per isomorphism class."""
    names = call_names(n)
    slots = [(i, j) for i in range(n) for j in range(n) if self_loops or i != j]
    perms = list(itertools.permutations(range(n)))
    for mask in range(1 << len(slots)):
        edges = [slots[k] for k in range(len(slots)) if mask >> k & 1]
        if up_to_isomorphism:
            code = sorted(edges)
            if any(sorted((p[i], p[j]) for i, j in edges) < code for p in perms):
                continue
        refs = {c: [] for c in names}
        for i, j in edges:
            refs[names[i]].append(names[j])
        yield CallGraph(refs)


def parent_maps(calls: Sequence[str], contracts: Sequence[ContractId]) -> Iterator[ParentMap]:
    for assignment in itertools.product(contracts, repeat=len(calls)):
        yield ParentMap(dict(zip(calls, assignment)), contracts)


def deployable_parent_maps(g: CallGraph, contracts: Sequence[ContractId]) -> list[ParentMap]:
    return [pm for pm in parent_maps(g.calls, contracts) if is_deployable(g, pm)]
