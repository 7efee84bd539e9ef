"""Calls, contracts, references and traces.

A :class:`CallGraph` records, for every call, the calls it directly
references. The trace of a call is everything reachable from it through one
or more reference steps. A :class:`ParentMap` assigns each call to the
contract that owns it; it is *deployable* when the contracts can be put in an
order where every contract only references calls of itself or of contracts
deployed before it.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Mapping

CallId = str
ContractId = str


class GraphError(ValueError):
    """Malformed call graph or parent map."""


class UnknownCall(KeyError):
    pass


class UnknownContract(KeyError):
    pass


class NotDeployable(ValueError):
    """No deployment order exists for a parent map.

    ``cycle`` holds contracts that mutually reference each other's calls.
    """

    def __init__(self, cycle: list[ContractId]):
        self.cycle = cycle
        super().__init__("contracts reference each other: " + " -> ".join(cycle))


class CallGraph:
    """Immutable direct-reference relation over a finite set of calls."""

    __slots__ = ("_refs", "_traces", "_hash")

    def __init__(self, refs: Mapping[CallId, Iterable[CallId]]):
        table: dict[CallId, tuple[CallId, ...]] = {}
        for call, targets in refs.items():
            if not isinstance(call, str) or not call:
                raise GraphError(f"call ids must be non-empty strings, got {call!r}")
            targets = tuple(targets)
            if len(set(targets)) != len(targets):
                raise GraphError(f"duplicate reference in refs of {call!r}")
            table[call] = targets
        for call, targets in table.items():
            for t in targets:
                if t not in table:
                    raise GraphError(f"{call!r} references unknown call {t!r}")
        self._refs = table
        self._traces: dict[CallId, frozenset[CallId]] = {}
        self._hash = hash(frozenset(table.items()))

    @property
    def calls(self) -> tuple[CallId, ...]:
        return tuple(sorted(self._refs))

    def refs(self, c: CallId) -> tuple[CallId, ...]:
        try:
            return self._refs[c]
        except KeyError:
            raise UnknownCall(c) from None

    def __contains__(self, c: object) -> bool:
        return c in self._refs

    def __len__(self) -> int:
        return len(self._refs)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CallGraph):
            return NotImplemented
        return self._refs == other._refs

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(f"{c}->{list(r)}" for c, r in sorted(self._refs.items()))
        return f"CallGraph({body})"

    def as_dict(self) -> dict[CallId, list[CallId]]:
        return {c: list(r) for c, r in self._refs.items()}

    def trace(self, c: CallId) -> frozenset[CallId]:
        cached = self._traces.get(c)
        if cached is not None:
            return cached
        seen: set[CallId] = set()
        stack = list(self.refs(c))
        while stack:
            d = stack.pop()
            if d in seen:
                continue
            seen.add(d)
            stack.extend(self._refs[d])
        result = frozenset(seen)
        self._traces[c] = result
        return result


def trace(g: CallGraph, c: CallId) -> list[CallId]:
    """Calls reachable from ``c`` in one or more steps, sorted by id.

    ``c`` itself is a member only when it lies on a reference cycle.
    """
    return sorted(g.trace(c))


def fresh_call(g: CallGraph, referencing: CallId, prefix: str = "fresh") -> tuple[CallGraph, CallId]:
    """Return ``(g2, c)`` where ``c`` is a new call whose only reference is ``referencing``."""
    if referencing not in g:
        raise UnknownCall(referencing)
    for i in itertools.count():
        name = f"{prefix}{i}"
        if name not in g:
            break
    refs = g.as_dict()
    refs[name] = [referencing]
    return CallGraph(refs), name


class ParentMap:
    """Total assignment of calls to owning contracts.

    ``contracts`` fixes the contract universe and its input order, which is
    used to break ties when computing a deployment order. Contracts may own
    no calls.
    """

    __slots__ = ("_parent", "_contracts", "_hash", "_children")

    def __init__(self, parent: Mapping[CallId, ContractId], contracts: Iterable[ContractId] | None = None):
        parent = dict(parent)
        if contracts is None:
            contracts = sorted(set(parent.values()))
        contracts = tuple(contracts)
        if len(set(contracts)) != len(contracts):
            raise GraphError("duplicate contract id")
        for x in contracts:
            if not isinstance(x, str) or not x:
                raise GraphError(f"contract ids must be non-empty strings, got {x!r}")
        known = set(contracts)
        for c, x in parent.items():
            if x not in known:
                raise GraphError(f"call {c!r} assigned to unknown contract {x!r}")
        self._parent = parent
        self._contracts = contracts
        self._hash = hash((frozenset(parent.items()), contracts))
        kids: dict[ContractId, set[CallId]] = {x: set() for x in contracts}
        for c, x in parent.items():
            kids[x].add(c)
        self._children = {x: frozenset(s) for x, s in kids.items()}

    @property
    def contracts(self) -> tuple[ContractId, ...]:
        return self._contracts

    def __getitem__(self, c: CallId) -> ContractId:
        try:
            return self._parent[c]
        except KeyError:
            raise UnknownCall(c) from None

    def get(self, c: CallId, default=None):
        return self._parent.get(c, default)

    def items(self):
        return self._parent.items()

    def calls(self) -> frozenset[CallId]:
        return frozenset(self._parent)

    def children(self, x: ContractId) -> frozenset[CallId]:
        try:
            return self._children[x]
        except KeyError:
            raise UnknownContract(x) from None

    def with_assignment(self, c: CallId, x: ContractId) -> ParentMap:
        parent = dict(self._parent)
        parent[c] = x
        return ParentMap(parent, self._contracts)

    def as_dict(self) -> dict[CallId, ContractId]:
        return dict(self._parent)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ParentMap):
            return NotImplemented
        return self._parent == other._parent and self._contracts == other._contracts

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(f"{c}:{x}" for c, x in sorted(self._parent.items()))
        return f"ParentMap({body}; contracts={list(self._contracts)})"


def children(pm: ParentMap, x: ContractId) -> list[CallId]:
    return sorted(pm.children(x))


def _check_cover(g: CallGraph, pm: ParentMap) -> None:
    if pm.calls() != frozenset(g.calls):
        missing = sorted(set(g.calls) - pm.calls())
        extra = sorted(pm.calls() - set(g.calls))
        raise GraphError(f"parent map does not cover the graph (missing={missing}, extra={extra})")


def contract_dependencies(g: CallGraph, pm: ParentMap) -> dict[ContractId, set[ContractId]]:
    """For each contract, the other contracts whose calls its children reference."""
    deps: dict[ContractId, set[ContractId]] = {x: set() for x in pm.contracts}
    for c in g.calls:
        x = pm[c]
        for d in g.refs(c):
            y = pm[d]
            if y != x:
                deps[x].add(y)
    return deps


def deployment_order(g: CallGraph, pm: ParentMap) -> list[ContractId]:
    """Contracts listed earliest-deployed first.

    Every cross-contract reference points from a later contract to an
    earlier one. Among contracts that are ready at the same time the one
    appearing first in ``pm.contracts`` wins. Raises :class:`NotDeployable`.
    """
    _check_cover(g, pm)
    deps = contract_dependencies(g, pm)
    position = {x: i for i, x in enumerate(pm.contracts)}
    remaining = {x: set(d) for x, d in deps.items()}
    order: list[ContractId] = []
    while remaining:
        ready = [x for x, d in remaining.items() if not d]
        if not ready:
            raise NotDeployable(_find_cycle(remaining))
        x = min(ready, key=position.__getitem__)
        order.append(x)
        del remaining[x]
        for d in remaining.values():
            d.discard(x)
    return order


def _find_cycle(edges: Mapping[str, set[str]]) -> list[str]:
    # every node has an outgoing edge inside ``edges``, so walking must revisit
    node = min(edges)
    path: list[str] = []
    index: dict[str, int] = {}
    while node not in index:
        index[node] = len(path)
        path.append(node)
        node = min(n for n in edges[node] if n in edges)
    return path[index[node]:] + [node]


def is_deployable(g: CallGraph, pm: ParentMap) -> bool:
    try:
        deployment_order(g, pm)
    except NotDeployable:
        return False
    return True
