import sys

import numpy as np
import pytest
from hypothesis import settings, strategies as st

from pureextract.spinbasis import FullBasis, PureState, TwoFlipBasis

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def random_state(basis, rng: np.random.Generator) -> PureState:
    z = rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim)
    return PureState.from_unnormalized(basis, z)


@st.composite
def full_states(draw, min_sites=2, max_sites=6):
    n = draw(st.integers(min_sites, max_sites))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_state(FullBasis(n), np.random.default_rng(seed))


@st.composite
def two_flip_states(draw, min_sites=4, max_sites=10):
    n = draw(st.integers(min_sites, max_sites))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_state(TwoFlipBasis(n), np.random.default_rng(seed))


@st.composite
def bipartitions(draw, n_sites):
    """Shuffled split of 1..n_sites into two nonempty parts."""
    perm = draw(st.permutations(list(range(1, n_sites + 1))))
    cut = draw(st.integers(1, n_sites - 1))
    return tuple(perm[:cut]), tuple(perm[cut:])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.RESULTS:
        terminalreporter.write_line(line)
