import pytest

from sws1.core import ModeParams
from sws1.recurrence import compute_series


@pytest.fixture(scope="session")
def state_m1_n8():
    return compute_series(ModeParams(m=1, N=8))


@pytest.fixture(scope="session")
def state_m2_n8():
    return compute_series(ModeParams(m=2, N=8))


@pytest.fixture(scope="session")
def state_m3_n8():
    return compute_series(ModeParams(m=3, N=8))


@pytest.fixture(scope="session")
def states_n8(state_m1_n8, state_m2_n8, state_m3_n8):
    return {1: state_m1_n8, 2: state_m2_n8, 3: state_m3_n8}


@pytest.fixture(scope="session")
def states_n10():
    return {m: compute_series(ModeParams(m=m, N=10)) for m in (1, 2, 3)}
