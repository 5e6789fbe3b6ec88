import math

import pytest
from hypothesis import HealthCheck, settings

from airblock.safety_filter import SafetyParams

settings.register_profile(
    "default", deadline=None, max_examples=200, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def params():
    return SafetyParams(r=30.0, alpha=3.0, v=5.0)


@pytest.fixture(scope="session")
def monte_carlo_seed0():
    """One n=100 batch shared by the safety and Monte Carlo checks."""
    import time

    from airblock.sim.montecarlo import run_monte_carlo

    t0 = time.perf_counter()
    summary = run_monte_carlo(0, 100)
    summary["_elapsed_s"] = time.perf_counter() - t0
    return summary


def close(a, b, tol=1e-9):
    return math.isclose(a, b, rel_tol=0.0, abs_tol=tol)
