"""Exhaustive checks of the five sequencing axioms on small universes.

A rights system is given extensionally: for a graph and a deployable parent
map it yields the finite family of constraint vectors it allows. Every check
returns an :class:`AxiomReport`; a failing report carries a witness that
:func:`replay` can re-verify independently.
"""

from __future__ import annotations

import functools
import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .block import TransactionBatch, validate_block
from .call_graph import CallGraph, CallId, ContractId, ParentMap, fresh_call, is_deployable
from .rights import (
    ConstraintSet,
    Pair,
    StrictPartialOrder,
    all_strict_partial_orders,
    induce_contract,
    induce_pairs,
    transitive_closure,
)

AXIOMS = ("existence", "priority", "extension", "reducibility", "iic")

FamilyFn = Callable[[CallGraph, ParentMap], Iterable[ConstraintSet]]


class RightsSystem:
    """Named rights system with a per-instance family cache."""

    def __init__(self, name: str, family: FamilyFn, description: str = "",
                 achievable: Callable[[CallGraph, ParentMap], Iterable] | None = None):
        self.name = name
        self.description = description
        self._family = family
        # optional shortcut for systems whose family is a product over contracts
        self._achievable_fn = achievable
        self._cache: dict[tuple[CallGraph, ParentMap], list[ConstraintSet]] = {}
        self._achievable: dict[tuple[CallGraph, ParentMap], frozenset] = {}

    def __repr__(self) -> str:
        return f"RightsSystem({self.name!r})"

    def family(self, g: CallGraph, pm: ParentMap) -> list[ConstraintSet]:
        key = (g, pm)
        fam = self._cache.get(key)
        if fam is None:
            fam = sorted(set(self._family(g, pm)), key=_vector_sort_key)
            if not fam:
                raise ValueError(f"{self.name}: empty family for {pm!r}")
            self._cache[key] = fam
        return fam

    def achievable(self, g: CallGraph, pm: ParentMap) -> frozenset[tuple[ContractId, CallId, CallId]]:
        """Every ``(x, t, t2)`` such that some allowed vector ranks ``t`` over ``t2`` for ``x``."""
        key = (g, pm)
        got = self._achievable.get(key)
        if got is None:
            if self._achievable_fn is not None:
                got = frozenset(self._achievable_fn(g, pm))
            else:
                got = frozenset((x, t, t2) for v in self.family(g, pm)
                                for x, rel in v.relations.items() for t, t2 in rel)
            self._achievable[key] = got
        return got

    def clear_cache(self) -> None:
        self._cache.clear()
        self._achievable.clear()


def _vector_sort_key(v: ConstraintSet):
    return tuple((x, sorted(r)) for x, r in v.key())


@dataclass
class AxiomReport:
    axiom: str
    passed: bool
    witness: dict | None = None
    checked: int = 0

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_json(self) -> dict:
        return {"axiom": self.axiom, "verdict": self.verdict, "checked": self.checked, "witness": self.witness}


def _pm_json(pm: ParentMap) -> dict[str, str]:
    return dict(sorted(pm.as_dict().items()))


# --- admissible orders and the induced rights system -----------------------

_ORDER_CACHE: dict[frozenset, tuple[list[StrictPartialOrder], frozenset[Pair]]] = {}


@functools.lru_cache(maxsize=None)
def _orders_on(n: int) -> tuple[frozenset[tuple[int, int]], ...]:
    return tuple(all_strict_partial_orders(range(n)))


@functools.lru_cache(maxsize=None)
def _canonical_templates(n: int, edges: tuple[tuple[int, int], ...]) -> tuple[frozenset[tuple[int, int]], ...]:
    # same test as is_closed_admissible, over sibling indices 0..n-1 where
    # ``edges`` holds (i, j) whenever sibling j is in the trace of sibling i
    forbidden = frozenset(edges)
    callers = [[i for i, j in edges if j == d] for d in range(n)]
    return tuple(
        rel for rel in _orders_on(n)
        if forbidden.isdisjoint(rel) and all((c, c3) in rel for c, c2 in rel for c3 in callers[c2]))


@functools.lru_cache(maxsize=None)
def _admissible_templates(local: tuple[frozenset[int], ...]) -> tuple[frozenset[tuple[int, int]], ...]:
    n = len(local)
    edges = [(i, j) for i in range(n) for j in local[i]]
    best = best_perm = None
    for perm in itertools.permutations(range(n)):
        e = tuple(sorted((perm[i], perm[j]) for i, j in edges))
        if best is None or e < best:
            best, best_perm = e, perm
    back = {k: i for i, k in enumerate(best_perm)}
    return tuple(frozenset((back[a], back[b]) for a, b in rel) for rel in _canonical_templates(n, best))


_ENTRY_CACHE: dict[tuple[CallGraph, frozenset[CallId]], tuple[list[StrictPartialOrder], frozenset[Pair]]] = {}


def _admissible_entry(g: CallGraph, pm: ParentMap, x: ContractId):
    kids = pm.children(x)
    got = _ENTRY_CACHE.get((g, kids))
    if got is None:
        if len(_ENTRY_CACHE) > 200_000:
            _ENTRY_CACHE.clear()
        got = _ENTRY_CACHE[(g, kids)] = _admissible_entry_by_shape(g, kids)
    return got


def _admissible_entry_by_shape(g: CallGraph, kids: frozenset[CallId]):
    # admissibility only looks at traces among the contract's own children
    key = frozenset((c, g.trace(c) & kids) for c in kids)
    got = _ORDER_CACHE.get(key)
    if got is None:
        elems = sorted(kids)
        pos = {c: i for i, c in enumerate(elems)}
        local = tuple(frozenset(pos[d] for d in g.trace(c) & kids) for c in elems)
        orders = [StrictPartialOrder(kids, frozenset((elems[i], elems[j]) for i, j in rel))
                  for rel in _admissible_templates(local)]
        got = _ORDER_CACHE[key] = (orders, frozenset().union(*(o.pairs for o in orders)))
    return got


def admissible_orders(g: CallGraph, pm: ParentMap, x: ContractId) -> list[StrictPartialOrder]:
    """All admissible, extension-closed strict partial orders over ``x``'s children."""
    return _admissible_entry(g, pm, x)[0]


def induced_contract_relations(g: CallGraph, pm: ParentMap, x: ContractId) -> list[frozenset[Pair]]:
    return [induce_contract(g, pm, x, o) for o in admissible_orders(g, pm, x)]


def _induced_family(g: CallGraph, pm: ParentMap) -> Iterable[ConstraintSet]:
    per = [induced_contract_relations(g, pm, x) for x in pm.contracts]
    for combo in itertools.product(*per):
        yield ConstraintSet(dict(zip(pm.contracts, combo)))


def _induced_achievable(g: CallGraph, pm: ParentMap):
    # inducing is pairwise, so the union over orders is the induction of the union
    for x in pm.contracts:
        for t, t2 in induce_pairs(g, pm, x, _admissible_entry(g, pm, x)[1]):
            yield x, t, t2


def induced_system() -> RightsSystem:
    return RightsSystem("induced", _induced_family, "declared orders plus trace-induced cross-contract pairs",
                        achievable=_induced_achievable)


# --- existence and orderability -------------------------------------------

def orderable_by_search(seq: Sequence[CallId], relation: set[Pair] | frozenset[Pair]) -> tuple[CallId, ...] | None:
    """Brute force: some arrangement of ``seq`` with no later call ranked over an earlier one."""
    for perm in itertools.permutations(seq):
        if all((perm[j], perm[i]) not in relation for i in range(len(perm)) for j in range(i + 1, len(perm))):
            return perm
    return None


def existence_witness(v: ConstraintSet, calls: Sequence[CallId], max_len: int) -> list[CallId] | None:
    """First transaction sequence (with repetition) that no block can order, if any."""
    if max_len > 6:
        raise ValueError("max_len above 6 is not supported")
    relation = v.union()
    if not any(a == b for a, b in transitive_closure(relation)):
        return None  # acyclic, so every subset of calls can be ordered
    memo: dict[tuple[CallId, ...], bool] = {}
    calls = sorted(calls)
    # repeated calls never constrain each other, so the verdict is a function of the distinct calls
    for r in range(1, min(max_len, len(calls)) + 1):
        for distinct in itertools.combinations(calls, r):
            inside = [p for p in relation if p[0] in distinct and p[1] in distinct]
            memo[distinct] = not inside or orderable_by_search(distinct, inside) is not None
    if all(memo.values()):
        return None
    for n in range(1, max_len + 1):
        for seq in itertools.product(calls, repeat=n):
            if not memo[tuple(sorted(set(seq)))]:
                return list(seq)
    return None


def check_existence(sys: RightsSystem, g: CallGraph, pm: ParentMap, max_len: int = 4) -> AxiomReport:
    fam = sys.family(g, pm)
    for v in fam:
        seq = existence_witness(v, g.calls, max_len)
        if seq is not None:
            return AxiomReport("existence", False,
                               {"parent_map": _pm_json(pm), "relations": v.to_json(), "sequence": seq}, len(fam))
    return AxiomReport("existence", True, None, len(fam))


@dataclass
class Orderability:
    embedding: dict[CallId, int] | None
    cycle: list[CallId] | None = field(default=None)

    def __bool__(self) -> bool:
        return self.embedding is not None


def q_orderable(relations: ConstraintSet | Iterable[Pair], calls: Iterable[CallId]) -> Orderability:
    """Embed the union of all relations into the integers, or report a cycle.

    Indices come from a linear extension of the transitive closure, taking
    the smallest id among the currently maximal calls; the first call gets
    the largest index.
    """
    union = relations.union() if isinstance(relations, ConstraintSet) else set(relations)
    calls = sorted(set(calls) | {c for p in union for c in p})
    closed = transitive_closure(union)
    loops = sorted(a for a, b in closed if a == b)
    if loops:
        return Orderability(None, _cycle_through(loops[0], union))
    below: dict[CallId, set[CallId]] = {c: set() for c in calls}
    indeg = {c: 0 for c in calls}
    for a, b in closed:
        below[a].add(b)
        indeg[b] += 1
    ready = sorted(c for c in calls if indeg[c] == 0)
    out = []
    while ready:
        c = ready.pop(0)
        out.append(c)
        for d in below[c]:
            indeg[d] -= 1
            if indeg[d] == 0:
                ready.append(d)
        ready.sort()
    n = len(out)
    return Orderability({c: n - 1 - i for i, c in enumerate(out)})


def _cycle_through(start: CallId, pairs: Iterable[Pair]) -> list[CallId]:
    succ: dict[CallId, list[CallId]] = {}
    for a, b in sorted(pairs):
        succ.setdefault(a, []).append(b)
    prev: dict[CallId, CallId] = {}
    queue = deque([start])
    while queue:
        n = queue.popleft()
        for m in succ.get(n, ()):
            if m == start:
                path = [n]
                while path[-1] != start:
                    path.append(prev[path[-1]])
                return path[::-1]
            if m not in prev:
                prev[m] = n
                queue.append(m)
    raise AssertionError("no cycle through start")


# --- priority ---------------------------------------------------------------

def _restrict(rel: frozenset[Pair], kids: frozenset[CallId]) -> frozenset[Pair]:
    return frozenset((a, b) for a, b in rel if a in kids and b in kids)


def check_priority(sys: RightsSystem, g: CallGraph, pm: ParentMap) -> AxiomReport:
    fam = sys.family(g, pm)
    kids = {x: pm.children(x) for x in pm.contracts}
    index: dict[tuple, set[frozenset[Pair]]] = {}
    for v in fam:
        for x in pm.contracts:
            others = tuple((y, v[y]) for y in pm.contracts if y != x)
            index.setdefault((x, others), set()).add(_restrict(v[x], kids[x]))
    checked = 0
    for v in fam:
        for x in pm.contracts:
            others = tuple((y, v[y]) for y in pm.contracts if y != x)
            reachable = index[(x, others)]
            for o in admissible_orders(g, pm, x):
                checked += 1
                if o.pairs not in reachable:
                    return AxiomReport("priority", False, {
                        "parent_map": _pm_json(pm), "relations": v.to_json(),
                        "contract": x, "order": [list(p) for p in o.sorted_pairs()]}, checked)
    return AxiomReport("priority", True, None, checked)


# --- extension and reducibility --------------------------------------------

def _callers(g: CallGraph) -> dict[CallId, list[CallId]]:
    return {c: sorted(d for d in g.calls if c in g.trace(d)) for c in g.calls}


def extension_failure(v: ConstraintSet, g: CallGraph, callers: dict[CallId, list[CallId]] | None = None,
                      ) -> tuple[ContractId, CallId, CallId, CallId] | None:
    callers = callers or _callers(g)
    for x in v.contracts():
        rel = v[x]
        for c, c2 in sorted(rel):
            for c3 in callers[c2]:
                if (c, c3) not in rel:
                    return (x, c, c2, c3)
    return None


def check_extension(sys: RightsSystem, g: CallGraph, pm: ParentMap) -> AxiomReport:
    fam = sys.family(g, pm)
    callers = _callers(g)
    for v in fam:
        bad = extension_failure(v, g, callers)
        if bad is not None:
            x, c, c2, c3 = bad
            return AxiomReport("extension", False, {
                "parent_map": _pm_json(pm), "relations": v.to_json(),
                "contract": x, "above": c, "below": c2, "caller": c3}, len(fam))
    return AxiomReport("extension", True, None, len(fam))


def reducibility_failure(v: ConstraintSet, g: CallGraph, pm: ParentMap) -> tuple[ContractId, CallId, CallId] | None:
    for x in v.contracts():
        rel = v[x]
        for c, c2 in sorted(rel):
            if pm[c2] == x:
                continue
            if not any(pm[d] == x and (c, d) in rel for d in g.trace(c2)):
                return (x, c, c2)
    return None


def check_reducibility(sys: RightsSystem, g: CallGraph, pm: ParentMap) -> AxiomReport:
    fam = sys.family(g, pm)
    for v in fam:
        bad = reducibility_failure(v, g, pm)
        if bad is not None:
            x, c, c2 = bad
            return AxiomReport("reducibility", False, {
                "parent_map": _pm_json(pm), "relations": v.to_json(),
                "contract": x, "above": c, "below": c2}, len(fam))
    return AxiomReport("reducibility", True, None, len(fam))


# --- independence of irrelevant calls --------------------------------------

_deployable = functools.lru_cache(maxsize=1 << 16)(is_deployable)


def _agree(pm: ParentMap, other: ParentMap, calls: Iterable[CallId]) -> bool:
    return all(pm[c] == other[c] for c in calls)


@dataclass
class _Groups:
    relevant: dict[Pair, tuple[CallId, ...]] = field(default_factory=dict)
    # relevant calls -> their assignment -> alternates with that assignment
    by_relevant: dict[tuple[CallId, ...], dict[tuple[ContractId, ...], list[ParentMap]]] = field(default_factory=dict)


def _iic_anchor(sys: RightsSystem, g: CallGraph, pm: ParentMap, pms: Sequence[ParentMap],
                groups: _Groups) -> tuple[dict | None, int]:
    checked = 0
    for x, t, t2 in sorted(sys.achievable(g, pm)):
        relevant = groups.relevant.get((t, t2))
        if relevant is None:
            relevant = groups.relevant[(t, t2)] = tuple(sorted({t, t2} | g.trace(t) | g.trace(t2)))
        by_proj = groups.by_relevant.get(relevant)
        if by_proj is None:
            by_proj = groups.by_relevant[relevant] = {}
            for alt in pms:
                by_proj.setdefault(tuple(alt[c] for c in relevant), []).append(alt)
        for alt in by_proj.get(tuple(pm[c] for c in relevant), ()):
            if alt == pm:
                continue
            checked += 1
            if (x, t, t2) not in sys.achievable(g, alt):
                return {"parent_map": _pm_json(pm), "alternate": _pm_json(alt),
                        "contract": x, "above": t, "below": t2}, checked
    return None, checked


def _involves(g: CallGraph, c: CallId, triple: tuple[ContractId, CallId, CallId]) -> bool:
    _, t, t2 = triple
    return c in (t, t2) or c in g.trace(t) or c in g.trace(t2)


def _iic_rich(sys: RightsSystem, g: CallGraph, pm: ParentMap,
              fresh: dict[CallId, tuple[CallGraph, CallId]]) -> tuple[dict | None, int]:
    # alternates for each anchor are its own placements of the fresh call
    checked = 0
    for t2 in sorted({t2 for _, _, t2 in sys.achievable(g, pm)}):
        if t2 not in fresh:
            fresh[t2] = fresh_call(g, t2)
        g2, c_new = fresh[t2]
        placed = [p for p in (pm.with_assignment(c_new, y) for y in pm.contracts) if _deployable(g2, p)]
        # placements differ only at c_new, so every triple that does not involve
        # c_new must be achievable under all of them; when it is, skip the scan
        untouched = [frozenset(tr for tr in sys.achievable(g2, p) if not _involves(g2, c_new, tr)) for p in placed]
        if all(u == untouched[0] for u in untouched):
            checked += len(untouched[0]) * len(placed) * (len(placed) - 1)
            continue
        groups = _Groups()
        for p in placed:
            witness, n = _iic_anchor(sys, g2, p, placed, groups)
            checked += n
            if witness is not None:
                witness["fresh_call"] = {"id": c_new, "refs": [t2]}
                return witness, checked
    return None, checked


def iic_reports(sys: RightsSystem, g: CallGraph, pms: Sequence[ParentMap],
                anchors: Sequence[ParentMap] | None = None, richness: bool = True) -> list[AxiomReport]:
    """One independence report per deployable anchor, sharing work between anchors.

    ``pms`` is the family of alternate parent maps (non-deployable ones are
    skipped); ``anchors`` defaults to the same family. With ``richness`` each
    anchor is also checked on graphs extended by a fresh call referencing the
    lower call of an achievable pair, over every placement of that call.
    """
    pms = [pm for pm in pms if _deployable(g, pm)]
    anchors = pms if anchors is None else [pm for pm in anchors if _deployable(g, pm)]
    groups = _Groups()
    fresh: dict = {}
    out = []
    for pm in anchors:
        witness, checked = _iic_anchor(sys, g, pm, pms, groups)
        if witness is None and richness:
            witness, n = _iic_rich(sys, g, pm, fresh)
            checked += n
        out.append(AxiomReport("iic", witness is None, witness, checked))
    return out


def check_iic(sys: RightsSystem, g: CallGraph, pms: Sequence[ParentMap],
              anchors: Sequence[ParentMap] | None = None, richness: bool = True) -> AxiomReport:
    """Rights over a pair may only depend on parents of the pair and their traces.

    Fails on the first failing anchor; see :func:`iic_reports` for the parameters.
    """
    reports = iic_reports(sys, g, pms, anchors, richness)
    for r in reports:
        if not r.passed:
            return r
    return AxiomReport("iic", True, None, sum(r.checked for r in reports))


# --- replay ---------------------------------------------------------------

def _vector_from_json(data: dict) -> ConstraintSet:
    return ConstraintSet({x: frozenset(tuple(p) for p in pairs) for x, pairs in data.items()})


def _pm_from_json(data: dict, contracts: Sequence[ContractId]) -> ParentMap:
    return ParentMap(data, contracts)


def replay(report: AxiomReport, sys: RightsSystem, g: CallGraph, contracts: Sequence[ContractId]) -> bool:
    """Re-derive a failing report's violation from scratch; True when confirmed."""
    w = report.witness
    if report.passed or w is None:
        return False
    if "fresh_call" in w:
        g, _ = fresh_call(g, w["fresh_call"]["refs"][0])
    pm = _pm_from_json(w["parent_map"], contracts)
    if report.axiom == "iic":
        alt = _pm_from_json(w["alternate"], contracts)
        x, t, t2 = w["contract"], w["above"], w["below"]
        relevant = {t, t2} | g.trace(t) | g.trace(t2)
        if not _agree(pm, alt, relevant):
            return False
        before = any((t, t2) in v[x] for v in sys.family(g, pm))
        after = any((t, t2) in v[x] for v in sys.family(g, alt))
        return before and not after
    v = _vector_from_json(w["relations"])
    if v not in sys.family(g, pm):
        return False
    if report.axiom == "existence":
        batch = TransactionBatch.of((f"tx{i}", c) for i, c in enumerate(w["sequence"]))
        return not any(validate_block(perm, batch, v) for perm in itertools.permutations(batch.ids()))
    if report.axiom == "priority":
        x = w["contract"]
        kids = pm.children(x)
        target = frozenset(tuple(p) for p in w["order"])
        return not any(
            _restrict(u[x], kids) == target and all(u[y] == v[y] for y in contracts if y != x)
            for u in sys.family(g, pm))
    if report.axiom == "extension":
        x, c, c2, c3 = w["contract"], w["above"], w["below"], w["caller"]
        return (c, c2) in v[x] and c2 in g.trace(c3) and (c, c3) not in v[x]
    if report.axiom == "reducibility":
        x, c, c2 = w["contract"], w["above"], w["below"]
        return (c, c2) in v[x] and pm[c2] != x and not any(
            pm[d] == x and (c, d) in v[x] for d in g.trace(c2))
    raise ValueError(f"unknown axiom {report.axiom!r}")


def check_all(sys: RightsSystem, g: CallGraph, pm: ParentMap, pms: Sequence[ParentMap],
              max_len: int = 4, richness: bool = True) -> list[AxiomReport]:
    return [
        check_existence(sys, g, pm, max_len),
        check_priority(sys, g, pm),
        check_extension(sys, g, pm),
        check_reducibility(sys, g, pm),
        check_iic(sys, g, pms, anchors=[pm], richness=richness),
    ]
