import numpy as np
import pytest
from hypothesis import settings, strategies as st

from qmc.system import SystemTuple

settings.register_profile("qmc", max_examples=40, deadline=None)
settings.load_profile("qmc")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_tuple(rng, m=2, N=2, q=None):
    mats = [rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)) for _ in range(N + 1)]
    poles = [0] + [complex(np.exp(complex(rng.uniform(-0.5, 0.5), rng.uniform(-3, 3))))
                   for _ in range(N)]
    q = rng.uniform(0.2, 0.8) if q is None else q
    return SystemTuple(q, poles, mats)


@st.composite
def tuples(draw, max_m=3, max_N=3):
    """Random generic tuples, driven by a hypothesis-chosen seed."""
    seed = draw(st.integers(0, 2**32 - 1))
    m = draw(st.integers(1, max_m))
    N = draw(st.integers(1, max_N))
    return random_tuple(np.random.default_rng(seed), m, N)


exponents = st.complex_numbers(min_magnitude=0.05, max_magnitude=1.2, allow_nan=False,
                               allow_infinity=False).filter(lambda z: abs(z.imag) < 0.5)
bases = st.floats(0.15, 0.85)
