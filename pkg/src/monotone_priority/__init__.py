"""Monotone priorities: contracts order their own calls through global integer priorities."""

from .block import Transaction, TransactionBatch, TieBreaker, build_block, validate_block
from .call_graph import CallGraph, NotDeployable, ParentMap, deployment_order, fresh_call, is_deployable, trace
from .priority import PriorityMap, is_valid, max_valid_priority
from .rights import ConstraintSet, OrderVector, StrictPartialOrder, holds, induce, is_admissible
from .synthesis import derive_orders, synthesize

__all__ = [
    "CallGraph",
    "ConstraintSet",
    "NotDeployable",
    "OrderVector",
    "ParentMap",
    "PriorityMap",
    "StrictPartialOrder",
    "TieBreaker",
    "Transaction",
    "TransactionBatch",
    "build_block",
    "deployment_order",
    "derive_orders",
    "fresh_call",
    "holds",
    "induce",
    "is_admissible",
    "is_deployable",
    "is_valid",
    "max_valid_priority",
    "synthesize",
    "trace",
    "validate_block",
]
