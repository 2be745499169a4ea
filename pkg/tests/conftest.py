import pytest
from fractions import Fraction

from mutashuffle.perm import Permutation, all_permutations
from mutashuffle.processes import (
    ADJ_TRANSPOSITION,
    CYCLE_TRANSPOSITION,
    ProcessSpec,
    RANDOM_TO_RANDOM,
    RANDOM_TO_TOP,
    WASH1D,
    WASH1D_LONG,
    WASH_GRID,
)
from mutashuffle.processes.base import WalkProcess
from mutashuffle.utils.seeding import replica_rng


class MoveOneToTop(WalkProcess):
    """Move label 1 to the top, or do nothing. Not fair: label 1 is special."""

    def sample_record(self, state, rng):
        return int(rng.integers(0, 2))

    def _transitions(self, state):
        yield 0, Fraction(1, 2)
        yield 1, Fraction(1, 2)

    def replay_step(self, state, record, time=1):
        if not record:
            return state, []
        return Permutation([1] + [c for c in state.map if c != 1]), []


@pytest.fixture(scope="session")
def s3():
    return all_permutations(3)


@pytest.fixture(scope="session")
def wash3():
    return ProcessSpec(WASH1D, 3)


@pytest.fixture(scope="session")
def cycle3():
    return ProcessSpec(CYCLE_TRANSPOSITION, 3)


@pytest.fixture(scope="session")
def adj3():
    return ProcessSpec(ADJ_TRANSPOSITION, 3)


@pytest.fixture(scope="session")
def r2r3():
    return ProcessSpec(RANDOM_TO_RANDOM, 3)


@pytest.fixture(scope="session")
def r2t3():
    return ProcessSpec(RANDOM_TO_TOP, 3)


@pytest.fixture(scope="session")
def wash_long3():
    return ProcessSpec(WASH1D_LONG, 3)


@pytest.fixture(scope="session")
def grid3():
    return ProcessSpec(WASH_GRID, 3, d=2)


@pytest.fixture(scope="session")
def broken_process():
    return MoveOneToTop(ProcessSpec(RANDOM_TO_TOP, 3))


@pytest.fixture(scope="function")
def rng():
    return replica_rng(1234, 0, 0)
