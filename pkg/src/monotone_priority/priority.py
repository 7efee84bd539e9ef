"""Global integer priorities and the monotone validity rule.

A priority map is valid when no call exceeds ``lambda_max`` and no call has
a higher priority than any call it directly references. Checking direct
references is enough: the inequality chains along every reference path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .call_graph import CallGraph, CallId

DEFAULT_LAMBDA_MAX = 0


class MissingPriority(KeyError):
    pass


@dataclass(frozen=True)
class PriorityMap:
    priorities: Mapping[CallId, int]
    lambda_max: int = DEFAULT_LAMBDA_MAX

    def __getitem__(self, c: CallId) -> int:
        try:
            return self.priorities[c]
        except KeyError:
            raise MissingPriority(c) from None

    def __contains__(self, c: object) -> bool:
        return c in self.priorities

    def shifted(self, delta: int) -> PriorityMap:
        return PriorityMap({c: v + delta for c, v in self.priorities.items()}, self.lambda_max)


@dataclass(frozen=True)
class Violation:
    """``kind`` is ``"cap"`` (priority above ``lambda_max``) or ``"edge"``."""

    kind: str
    call: CallId
    ref: CallId | None = None
    priority: int = 0
    bound: int = 0

    def describe(self) -> str:
        if self.kind == "cap":
            return f"{self.call} has priority {self.priority} above lambda_max {self.bound}"
        return f"{self.call} has priority {self.priority} above referenced {self.ref} ({self.bound})"


@dataclass(frozen=True)
class Validity:
    ok: bool
    violation: Violation | None = field(default=None)

    def __bool__(self) -> bool:
        return self.ok


def is_valid(pmap: PriorityMap, g: CallGraph) -> Validity:
    """Check the cap and every direct reference, reporting the first breach.

    Calls are scanned in id order; for each call the cap is checked before
    its references, which are scanned in id order too.
    """
    for c in g.calls:
        if c not in pmap:
            raise MissingPriority(c)
    for c in g.calls:
        v = pmap[c]
        if v > pmap.lambda_max:
            return Validity(False, Violation("cap", c, None, v, pmap.lambda_max))
        for r in sorted(g.refs(c)):
            if v > pmap[r]:
                return Validity(False, Violation("edge", c, r, v, pmap[r]))
    return Validity(True)


def max_valid_priority(g: CallGraph, partial: Mapping[CallId, int] | PriorityMap, c: CallId,
                       lambda_max: int | None = None) -> int:
    """Highest priority ``c`` may take given its references' priorities."""
    if isinstance(partial, PriorityMap):
        if lambda_max is None:
            lambda_max = partial.lambda_max
        partial = partial.priorities
    if lambda_max is None:
        lambda_max = DEFAULT_LAMBDA_MAX
    bound = lambda_max
    for r in g.refs(c):
        if r not in partial:
            raise MissingPriority(r)
        bound = min(bound, partial[r])
    return bound
