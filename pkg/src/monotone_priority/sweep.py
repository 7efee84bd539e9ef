"""Exhaustive axiom sweeps over every small call universe."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

from .axioms import (
    AxiomReport,
    RightsSystem,
    check_existence,
    check_extension,
    check_priority,
    check_reducibility,
    iic_reports,
    induced_system,
)
from .call_graph import CallGraph, ParentMap
from .universe import contract_names, deployable_parent_maps, reference_graphs

InstanceHook = Callable[[RightsSystem, CallGraph, ParentMap, list[AxiomReport]], None]


@dataclass
class SweepResult:
    graphs: int = 0
    instances: int = 0
    failures: list[tuple[CallGraph, ParentMap, AxiomReport]] = field(default_factory=list)
    seconds: float = 0.0
    hook_seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures

    @property
    def check_seconds(self) -> float:
        """Wall time spent in the sweep itself, excluding any per-instance hook."""
        return self.seconds - self.hook_seconds


def sweep(sys: RightsSystem | None = None, max_calls: int = 4, max_contracts: int = 3, max_len: int = 4,
          self_loops: bool = True, richness: bool = True, hook: InstanceHook | None = None) -> SweepResult:
    """Run all five checks on every deployable parent map of every reference graph.

    Graphs are taken up to isomorphism on 1..``max_calls`` calls, contracts
    are ``X0..X(k-1)`` for every ``k`` up to ``max_contracts``. ``hook`` is
    called once per instance with the reports, while the system's caches
    for that graph are still warm.
    """
    sys = sys or induced_system()
    out = SweepResult()
    start = time.perf_counter()
    for n in range(1, max_calls + 1):
        for g in reference_graphs(n, self_loops=self_loops):
            out.graphs += 1
            for k in range(1, max_contracts + 1):
                pms = deployable_parent_maps(g, contract_names(k))
                iic = iic_reports(sys, g, pms, richness=richness)
                for pm, iic_report in zip(pms, iic):
                    out.instances += 1
                    reports = [
                        check_existence(sys, g, pm, max_len),
                        check_priority(sys, g, pm),
                        check_extension(sys, g, pm),
                        check_reducibility(sys, g, pm),
                        iic_report,
                    ]
                    out.failures.extend((g, pm, r) for r in reports if not r.passed)
                    if hook is not None:
                        t = time.perf_counter()
                        hook(sys, g, pm, reports)
                        out.hook_seconds += time.perf_counter() - t
            sys.clear_cache()
    out.seconds = time.perf_counter() - start
    return out
