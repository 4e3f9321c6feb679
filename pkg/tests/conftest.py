import numpy as np
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def unit_vectors(dim):
    """Hypothesis strategy for unit vectors in R^dim (rejecting tiny norms)."""
    comp = st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False)
    return (st.lists(comp, min_size=dim, max_size=dim)
            .map(np.array)
            .filter(lambda v: np.linalg.norm(v) > 1e-3)
            .map(lambda v: v / np.linalg.norm(v)))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for num in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[num])
