import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

settings.register_profile("default", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def sequences(min_size=1, max_size=30, bound=1e3):
    """Finite float arrays with moderate magnitudes.

    Values are rounded to 1e-6 so that distinct levels never sit inside the
    absolute 1e-12 merge tolerance, where block structure is by design not
    the exact one.
    """
    elems = st.floats(-bound, bound, allow_nan=False, allow_infinity=False,
                      width=64).map(lambda v: round(v, 6))
    return st.integers(min_size, max_size).flatmap(
        lambda n: arrays(np.float64, n, elements=elems))


def small_int_sequences(min_size=1, max_size=10):
    """Integer-valued arrays: lots of exact ties between levels."""
    return st.lists(st.integers(-3, 3), min_size=min_size, max_size=max_size).map(
        lambda v: np.array(v, dtype=float))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
