"""Strict partial orders, admissibility, and the induced rights system.

A contract declares a strict partial order over its own calls. The induced
relation for contract ``x`` keeps the declared pairs and additionally ranks
``t`` above any foreign call whose trace contains a child of ``x`` that ``t``
was declared above.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Mapping

from .call_graph import CallGraph, CallId, ContractId, ParentMap, UnknownContract

Pair = tuple[CallId, CallId]


class OrderError(ValueError):
    """A relation that cannot be a strict partial order on its domain."""


class InadmissibleOrder(ValueError):
    def __init__(self, contract: ContractId, pair: Pair):
        self.contract = contract
        self.pair = pair
        super().__init__(f"{contract}: {pair[0]} ranked above {pair[1]}, which is in its trace")


def transitive_closure(pairs: Iterable[Pair]) -> set[Pair]:
    succ: dict[CallId, set[CallId]] = {}
    for a, b in pairs:
        succ.setdefault(a, set()).add(b)
    closed: set[Pair] = set()
    for start in succ:
        seen: set[CallId] = set()
        stack = list(succ[start])
        while stack:
            n = stack.pop()
            if n in seen:
                continue
            seen.add(n)
            stack.extend(succ.get(n, ()))
        closed.update((start, n) for n in seen)
    return closed


def transitive_reduction(pairs: frozenset[Pair]) -> list[Pair]:
    """Covering pairs of a transitively closed acyclic relation."""
    succ: dict[CallId, set[CallId]] = {}
    for a, b in pairs:
        succ.setdefault(a, set()).add(b)
    covers = []
    for a, b in pairs:
        if not any(m != b and (m, b) in pairs for m in succ[a]):
            covers.append((a, b))
    return sorted(covers)


@dataclass(frozen=True)
class StrictPartialOrder:
    """Irreflexive, transitive relation stored with its closure."""

    domain: frozenset[CallId]
    pairs: frozenset[Pair]

    @classmethod
    def from_pairs(cls, domain: Iterable[CallId], pairs: Iterable[Pair] = ()) -> StrictPartialOrder:
        domain = frozenset(domain)
        pairs = [tuple(p) for p in pairs]
        for a, b in pairs:
            if a not in domain or b not in domain:
                raise OrderError(f"pair ({a}, {b}) outside the order's domain")
        closed = transitive_closure(pairs)
        loops = sorted(a for a, b in closed if a == b)
        if loops:
            raise OrderError(f"declared pairs form a cycle through {loops[0]}")
        return cls(domain, frozenset(closed))

    @classmethod
    def empty(cls, domain: Iterable[CallId]) -> StrictPartialOrder:
        return cls(frozenset(domain), frozenset())

    def __contains__(self, pair: object) -> bool:
        return pair in self.pairs

    def __len__(self) -> int:
        return len(self.pairs)

    def generators(self) -> list[Pair]:
        return transitive_reduction(self.pairs)

    def sorted_pairs(self) -> list[Pair]:
        return sorted(self.pairs)


def all_strict_partial_orders(domain: Iterable[CallId]) -> Iterator[frozenset[Pair]]:
    """Every strict partial order on ``domain``, each exactly once."""
    elems = sorted(domain)
    for template in _order_templates(len(elems)):
        yield frozenset((elems[i], elems[j]) for i, j in template)


@lru_cache(maxsize=None)
def _order_templates(n: int) -> tuple[frozenset[tuple[int, int]], ...]:
    # Elements are inserted one at a time; a new element picks an up-closed
    # set above it and a down-closed set below it, with everything below
    # already under everything above.
    def grow(k: int, rel: frozenset) -> Iterator[frozenset]:
        if k == n:
            yield rel
            return
        above = {a: {b for b in range(k) if (b, a) in rel} for a in range(k)}
        below = {a: {b for b in range(k) if (a, b) in rel} for a in range(k)}
        for mask_up in range(1 << k):
            up = {i for i in range(k) if mask_up >> i & 1}
            if any(not above[u] <= up for u in up):
                continue
            for mask_down in range(1 << k):
                down = {i for i in range(k) if mask_down >> i & 1}
                if down & up:
                    continue
                if any(not below[d] <= down for d in down):
                    continue
                if any((u, d) not in rel for u in up for d in down):
                    continue
                extra = {(u, k) for u in up} | {(k, d) for d in down}
                yield from grow(k + 1, rel | extra)

    return tuple(grow(0, frozenset()))


def _check_domain(o: StrictPartialOrder, x: ContractId, pm: ParentMap) -> None:
    if o.domain != pm.children(x):
        raise OrderError(f"order domain does not equal the children of {x}")


def admissibility_violation(o: StrictPartialOrder, x: ContractId, g: CallGraph, pm: ParentMap) -> Pair | None:
    """First declared pair ``(c, c2)`` with ``c2`` in the trace of ``c``, if any."""
    _check_domain(o, x, pm)
    for c, c2 in o.sorted_pairs():
        if c2 in g.trace(c):
            return (c, c2)
    return None


def is_admissible(o: StrictPartialOrder, x: ContractId, g: CallGraph, pm: ParentMap) -> bool:
    return admissibility_violation(o, x, g, pm) is None


def extension_gap(o: StrictPartialOrder, x: ContractId, g: CallGraph, pm: ParentMap) -> tuple[CallId, CallId, CallId] | None:
    """First ``(c, c2, c3)`` with ``c > c2``, ``c2`` in the trace of sibling ``c3`` but not ``c > c3``."""
    _check_domain(o, x, pm)
    kids = sorted(o.domain)
    for c, c2 in o.sorted_pairs():
        for c3 in kids:
            if c2 in g.trace(c3) and (c, c3) not in o.pairs:
                return (c, c2, c3)
    return None


def is_extension_closed(o: StrictPartialOrder, x: ContractId, g: CallGraph, pm: ParentMap) -> bool:
    """Whether ranking ``c`` above a call also ranks it above every sibling calling that call."""
    return extension_gap(o, x, g, pm) is None


def is_closed_admissible(o: StrictPartialOrder, x: ContractId, g: CallGraph, pm: ParentMap) -> bool:
    return is_admissible(o, x, g, pm) and is_extension_closed(o, x, g, pm)


def close_under_extension(o: StrictPartialOrder, x: ContractId, g: CallGraph, pm: ParentMap) -> StrictPartialOrder:
    """Smallest extension-closed strict partial order containing ``o``.

    Raises :class:`OrderError` when closing produces a cycle.
    """
    _check_domain(o, x, pm)
    kids = sorted(o.domain)
    callers = {c: [k for k in kids if c in g.trace(k)] for c in kids}
    rel = set(o.pairs)
    while True:
        extra = {(a, k) for a, b in rel for k in callers[b]} - rel
        if not extra:
            break
        rel = transitive_closure(rel | extra)
        loops = sorted(a for a, b in rel if a == b)
        if loops:
            raise OrderError(f"{x}: closing the order under extension ranks {loops[0]} above itself")
    return StrictPartialOrder(o.domain, frozenset(rel))


class OrderVector(Mapping[ContractId, StrictPartialOrder]):
    """One strict partial order per contract, over that contract's children."""

    def __init__(self, orders: Mapping[ContractId, StrictPartialOrder], pm: ParentMap):
        table = {}
        for x in pm.contracts:
            o = orders.get(x)
            if o is None:
                o = StrictPartialOrder.empty(pm.children(x))
            _check_domain(o, x, pm)
            table[x] = o
        unknown = set(orders) - set(pm.contracts)
        if unknown:
            raise UnknownContract(sorted(unknown)[0])
        self._orders = table

    @classmethod
    def from_pairs(cls, pm: ParentMap, pairs: Mapping[ContractId, Iterable[Pair]]) -> OrderVector:
        orders = {}
        for x, ps in pairs.items():
            if x not in pm.contracts:
                raise UnknownContract(x)
            orders[x] = StrictPartialOrder.from_pairs(pm.children(x), ps)
        return cls(orders, pm)

    @classmethod
    def empty(cls, pm: ParentMap) -> OrderVector:
        return cls({}, pm)

    def __getitem__(self, x: ContractId) -> StrictPartialOrder:
        return self._orders[x]

    def __iter__(self):
        return iter(self._orders)

    def __len__(self) -> int:
        return len(self._orders)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OrderVector):
            return NotImplemented
        return self._orders == other._orders

    def __hash__(self) -> int:
        return hash(tuple(sorted((x, o.pairs) for x, o in self._orders.items())))

    def __repr__(self) -> str:
        body = ", ".join(f"{x}: {o.sorted_pairs()}" for x, o in self._orders.items())
        return f"OrderVector({body})"

    def generators(self) -> dict[ContractId, list[Pair]]:
        return {x: o.generators() for x, o in self._orders.items()}

    def refines(self, other: OrderVector) -> bool:
        """Every pair declared in ``other`` is also declared here."""
        return all(other[x].pairs <= self._orders[x].pairs for x in other)


@dataclass(frozen=True)
class ConstraintSet:
    """Per-contract sequencing relations over all calls."""

    relations: Mapping[ContractId, frozenset[Pair]]

    def __hash__(self) -> int:
        return hash(self.key())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ConstraintSet):
            return NotImplemented
        return self.key() == other.key()

    def key(self) -> tuple[tuple[ContractId, frozenset[Pair]], ...]:
        k = self.__dict__.get("_key")
        if k is None:
            k = tuple(sorted((x, r) for x, r in self.relations.items() if r))
            object.__setattr__(self, "_key", k)
        return k

    def __getitem__(self, x: ContractId) -> frozenset[Pair]:
        return self.relations.get(x, frozenset())

    def contracts(self) -> list[ContractId]:
        return sorted(self.relations)

    def union(self) -> set[Pair]:
        out: set[Pair] = set()
        for r in self.relations.values():
            out |= r
        return out

    def to_json(self) -> dict[str, list[list[str]]]:
        return {x: [list(p) for p in sorted(r)] for x, r in sorted(self.relations.items())}


def induce_contract(g: CallGraph, pm: ParentMap, x: ContractId, order: StrictPartialOrder) -> frozenset[Pair]:
    """The relation contract ``x`` obtains from its declared ``order``."""
    return induce_pairs(g, pm, x, order.pairs)


def induce_pairs(g: CallGraph, pm: ParentMap, x: ContractId, pairs: Iterable[Pair]) -> frozenset[Pair]:
    """Same as :func:`induce_contract` on a bare pair set; each output pair stems from one input pair."""
    rel = set(pairs)
    if not rel:
        return frozenset()
    above: dict[CallId, list[CallId]] = {}
    for t, c in rel:
        above.setdefault(c, []).append(t)
    for t2 in g.calls:
        if pm[t2] == x:
            continue
        for c in g.trace(t2):
            for t in above.get(c, ()):
                rel.add((t, t2))
    return frozenset(rel)


def induce(g: CallGraph, pm: ParentMap, ov: OrderVector) -> ConstraintSet:
    for x in pm.contracts:
        bad = admissibility_violation(ov[x], x, g, pm)
        if bad is not None:
            raise InadmissibleOrder(x, bad)
    return ConstraintSet({x: induce_contract(g, pm, x, ov[x]) for x in pm.contracts})


def holds(cs: ConstraintSet, x: ContractId, t: CallId, t2: CallId) -> bool:
    if x not in cs.relations:
        raise UnknownContract(x)
    return (t, t2) in cs.relations[x]

