import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from emdtest.distributions import from_arrays

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_pair(rng, d=1, delta=1.0, max_points=6, grid=None):
    """Two random distributions on ``[0, delta]^d``; ``grid`` snaps coordinates to multiples."""
    def one():
        k = int(rng.integers(1, max_points + 1))
        pts = rng.random((k, d)) * delta
        if grid:
            pts = np.round(pts / grid) * grid
        return from_arrays(pts, rng.random(k) + 0.05, d, delta, normalize=True)
    return one(), one()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@st.composite
def distributions(draw, d=1, delta=1.0, max_points=5):
    k = draw(st.integers(1, max_points))
    coords = draw(st.lists(st.lists(st.floats(0, delta, allow_nan=False), min_size=d, max_size=d),
                           min_size=k, max_size=k))
    weights = draw(st.lists(st.floats(0.01, 1.0), min_size=k, max_size=k))
    return from_arrays(np.array(coords), np.array(weights), d, delta, normalize=True)
