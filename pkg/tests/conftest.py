import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("fast", max_examples=5, deadline=None)
settings.register_profile("ci", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=300, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))

np.seterr(all="warn")

TOL = 1e-6


@pytest.fixture(autouse=True)
def _fresh_tables():
    """Branching tables are memoized per process; tests should not see each other's caps."""
    from sl2branch.branching import clear_table_cache

    clear_table_cache()
    yield
