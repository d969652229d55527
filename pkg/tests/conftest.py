import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from misskmeans import Dataset, MissingPoint

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")

REL = 1e-9


def close(a, b, rel=REL):
    return abs(a - b) <= rel * max(1.0, abs(a), abs(b))


coords = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


@st.composite
def points(draw, d=None, max_d=5):
    if d is None:
        d = draw(st.integers(1, max_d))
    vals = draw(st.lists(coords, min_size=d, max_size=d))
    mask = draw(st.lists(st.booleans(), min_size=d, max_size=d))
    return MissingPoint(np.array(vals), np.array(mask))


@st.composite
def datasets(draw, min_n=1, max_n=8, max_d=5, d=None, max_missing=None, allow_null=True):
    n = draw(st.integers(min_n, max_n))
    if d is None:
        d = draw(st.integers(1, max_d))
    vals = np.array(draw(st.lists(coords, min_size=n * d, max_size=n * d))).reshape(n, d)
    mask = np.array(draw(st.lists(st.booleans(), min_size=n * d, max_size=n * d))).reshape(n, d)
    if max_missing is not None:
        for p in range(n):
            missing = np.flatnonzero(~mask[p])
            if len(missing) > max_missing:
                mask[p, missing[max_missing:]] = True
    if not allow_null:
        for p in range(n):
            if not mask[p].any():
                mask[p, 0] = True
    return Dataset(vals, mask)


def random_instance(rng, n, d, delta, scale=3.0):
    """Gaussian values; each point misses a random 0..delta coordinates, point 0 exactly delta."""
    values = rng.normal(size=(n, d)) * scale
    mask = np.ones((n, d), dtype=bool)
    for p in range(n):
        s = rng.integers(0, delta + 1)
        mask[p, rng.choice(d, s, replace=False)] = False
    mask[0, :] = True
    mask[0, rng.choice(d, delta, replace=False)] = False
    return Dataset(values, mask)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
