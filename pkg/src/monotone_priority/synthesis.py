"""Conversion between declared order vectors and priority maps.

:func:`synthesize` turns per-contract orders into valid priorities that
respect every induced constraint. :func:`derive_orders` goes the other way,
reading each contract's order off a valid priority map.
"""

from __future__ import annotations

import heapq

from .call_graph import CallGraph, CallId, ContractId, ParentMap, deployment_order
from .priority import PriorityMap, Validity, is_valid
from .rights import (
    InadmissibleOrder,
    OrderError,
    OrderVector,
    StrictPartialOrder,
    admissibility_violation,
    close_under_extension,
)


class UnsatisfiableOrder(ValueError):
    """An admissible order that no valid priority map can respect.

    Raised when ranking ``c`` above ``c2`` also forces ranking ``c`` above
    every sibling that calls ``c2``, and those forced pairs close into a cycle.
    """

    def __init__(self, contract: ContractId, detail: str):
        self.contract = contract
        super().__init__(detail)


class InvalidPriorityMap(ValueError):
    def __init__(self, validity: Validity):
        self.violation = validity.violation
        super().__init__(validity.violation.describe())


class _Assigned(dict):
    # reads of calls not yet given a priority indicate a processing-order bug
    def __getitem__(self, c):
        if c not in self:
            raise RuntimeError(f"priority of {c} read before assignment")
        return dict.__getitem__(self, c)


def _reference_groups(g: CallGraph, kids: list[CallId]) -> list[tuple[CallId, ...]]:
    """Partition siblings into reference cycles; singletons for acyclic calls."""
    seen: set[CallId] = set()
    groups = []
    for c in kids:
        if c in seen:
            continue
        tr = g.trace(c)
        group = tuple(sorted({c} | {d for d in kids if d in tr and c in g.trace(d)}))
        seen.update(group)
        groups.append(group)
    return groups


def contract_sequence(g: CallGraph, pm: ParentMap, x: ContractId, order: StrictPartialOrder) -> list[tuple[CallId, ...]]:
    """Groups of ``x``'s children from highest to lowest priority.

    The sequence is a linear extension of the declared order that also puts
    every referenced sibling no later than its caller. Calls on a common
    reference cycle share a group. Ties go to the smallest call id.
    """
    kids = sorted(pm.children(x))
    groups = _reference_groups(g, kids)
    group_of = {c: i for i, grp in enumerate(groups) for c in grp}
    succ: dict[int, set[int]] = {i: set() for i in range(len(groups))}
    for a, b in order.pairs:
        succ[group_of[a]].add(group_of[b])
    for c in kids:
        for d in g.trace(c):
            if d in group_of and group_of[d] != group_of[c]:
                succ[group_of[d]].add(group_of[c])
    indeg = {i: 0 for i in succ}
    for i, targets in succ.items():
        if i in targets:
            raise UnsatisfiableOrder(x, f"{x}: declared order ranks calls on one reference cycle")
        for j in targets:
            indeg[j] += 1
    heap = [(groups[i][0], i) for i, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    out = []
    while heap:
        _, i = heapq.heappop(heap)
        out.append(groups[i])
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                heapq.heappush(heap, (groups[j][0], j))
    if len(out) != len(groups):
        raise UnsatisfiableOrder(x, f"{x}: declared order conflicts with the reference structure")
    return out


def synthesize(g: CallGraph, pm: ParentMap, ov: OrderVector, lambda_max: int = 0) -> PriorityMap:
    """Valid priorities under which every induced constraint is a strict drop.

    Contracts are processed earliest-deployed first, so every cross-contract
    reference already has a priority. Within a contract the groups from
    :func:`contract_sequence` get strictly decreasing priorities, each also
    capped by the minimum over its trace. The very first group starts at
    ``lambda_max - 1``.
    """
    assigned = _Assigned()
    for x in deployment_order(g, pm):
        o = ov[x]
        bad = admissibility_violation(o, x, g, pm)
        if bad is not None:
            raise InadmissibleOrder(x, bad)
        try:
            closed = close_under_extension(o, x, g, pm)
        except OrderError as exc:
            raise UnsatisfiableOrder(x, str(exc)) from exc
        prev = None
        for group in contract_sequence(g, pm, x, closed):
            value = lambda_max - 1 if prev is None else prev - 1
            for c in group:
                for d in g.trace(c):
                    if d not in group:
                        value = min(value, assigned[d])
            for c in group:
                assigned[c] = value
            prev = value
    return PriorityMap(dict(assigned), lambda_max)


def derive_orders(g: CallGraph, pm: ParentMap, pmap: PriorityMap) -> OrderVector:
    """Rank ``t`` above sibling ``t2`` exactly when its priority is higher."""
    validity = is_valid(pmap, g)
    if not validity:
        raise InvalidPriorityMap(validity)
    orders = {}
    for x in pm.contracts:
        kids = sorted(pm.children(x))
        pairs = frozenset((a, b) for a in kids for b in kids if pmap[a] > pmap[b])
        orders[x] = StrictPartialOrder(frozenset(kids), pairs)
    return OrderVector(orders, pm)
