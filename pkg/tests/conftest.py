from __future__ import annotations

import random

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from oracles import random_deployable

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def deployable_instances(draw, max_calls: int = 7, max_contracts: int = 3):
    """A random deployable (graph, parent map), plus the RNG that built it for follow-up draws."""
    rng = random.Random(draw(st.integers(0, 2**32 - 1)))
    g, pm = random_deployable(rng, max_calls, max_contracts)
    return g, pm, rng
