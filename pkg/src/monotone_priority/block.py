"""Ordering transactions into blocks and checking block validity."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .call_graph import CallId, ContractId
from .priority import MissingPriority, PriorityMap
from .rights import ConstraintSet


class BlockError(ValueError):
    pass


@dataclass(frozen=True)
class Transaction:
    id: str
    root: CallId


@dataclass(frozen=True)
class TransactionBatch:
    txs: tuple[Transaction, ...]

    def __post_init__(self):
        ids = [t.id for t in self.txs]
        if len(set(ids)) != len(ids):
            raise BlockError("duplicate transaction id")

    @classmethod
    def of(cls, pairs: Iterable[tuple[str, CallId]]) -> TransactionBatch:
        return cls(tuple(Transaction(i, r) for i, r in pairs))

    def __len__(self) -> int:
        return len(self.txs)

    def ids(self) -> list[str]:
        return [t.id for t in self.txs]

    def root_of(self) -> dict[str, CallId]:
        return {t.id: t.root for t in self.txs}


@dataclass(frozen=True)
class TieBreaker:
    """How equal-priority transactions are ordered.

    ``input`` keeps batch order, ``lex`` sorts by transaction id, and
    ``permutation`` sorts by ``permutation[i]`` for the ``i``-th transaction.
    """

    kind: str = "input"
    permutation: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("input", "lex", "permutation"):
            raise BlockError(f"unknown tie-breaker {self.kind!r}")
        if self.kind == "permutation" and self.permutation is None:
            raise BlockError("permutation tie-breaker needs a permutation")

    @classmethod
    def explicit(cls, perm: Sequence[int]) -> TieBreaker:
        return cls("permutation", tuple(perm))

    def ranks(self, batch: TransactionBatch) -> list:
        n = len(batch)
        if self.kind == "input":
            return list(range(n))
        if self.kind == "lex":
            return [t.id for t in batch.txs]
        perm = self.permutation
        if len(perm) != n or sorted(perm) != list(range(n)):
            raise BlockError(f"tie-breaker is not a permutation of 0..{n - 1}")
        return list(perm)


def build_block(batch: TransactionBatch, pmap: PriorityMap, tau: TieBreaker = TieBreaker()) -> list[str]:
    """Sort by descending root-call priority, then by the tie-breaker."""
    ranks = tau.ranks(batch)
    keyed = []
    for i, t in enumerate(batch.txs):
        if t.root not in pmap:
            raise MissingPriority(t.root)
        keyed.append((-pmap[t.root], ranks[i], i, t.id))
    keyed.sort()
    return [k[-1] for k in keyed]


@dataclass(frozen=True)
class BlockViolation:
    contract: ContractId
    earlier: int
    later: int


@dataclass(frozen=True)
class BlockCheck:
    ok: bool
    violation: BlockViolation | None = None

    def __bool__(self) -> bool:
        return self.ok


def validate_block(ordering: Sequence[str], batch: TransactionBatch, cs: ConstraintSet) -> BlockCheck:
    """A block is valid unless some later transaction's root is ranked above an earlier one's."""
    if sorted(ordering) != sorted(batch.ids()):
        raise BlockError("ordering is not a permutation of the batch")
    roots = batch.root_of()
    seq = [roots[tid] for tid in ordering]
    contracts = cs.contracts()
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            for x in contracts:
                if (seq[j], seq[i]) in cs.relations[x]:
                    return BlockCheck(False, BlockViolation(x, i, j))
    return BlockCheck(True)
