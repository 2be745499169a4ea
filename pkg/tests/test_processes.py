from fractions import Fraction

import numpy as np
import pytest

from mutashuffle.errors import InfeasibleRecordError, ShuffleValidationError
from mutashuffle.perm import Permutation, Transposition
from mutashuffle.processes import (
    ADJ_TRANSPOSITION,
    CYCLE_TRANSPOSITION,
    FAMILIES,
    ProcessSpec,
    RANDOM_TO_RANDOM,
    RANDOM_TO_TOP,
    WASH1D,
    WASH1D_LONG,
    WASH_GRID,
    build_process,
    enumerate_paths,
    replay,
    simulate,
)
from mutashuffle.processes.base import OVERTAKE, SAME_PILE, TOP_TWO
from mutashuffle.processes.batch import all_pairs_times, default_t_max, first_interaction_matrix, pair_times
from mutashuffle.processes.paths import process_for
from mutashuffle.processes.walks import all_cards_chosen
from mutashuffle.utils.seeding import batch_rng, replica_rng

SMALL_SPECS = [
    ProcessSpec(WASH1D, 3),
    ProcessSpec(WASH1D_LONG, 3),
    ProcessSpec(WASH1D_LONG, 3, merge="insertion"),
    ProcessSpec(WASH_GRID, 3, d=2),
    ProcessSpec(ADJ_TRANSPOSITION, 3),
    ProcessSpec(CYCLE_TRANSPOSITION, 3),
    ProcessSpec(RANDOM_TO_RANDOM, 3),
    ProcessSpec(RANDOM_TO_TOP, 3),
]


def test_spec_validation():
    with pytest.raises(ShuffleValidationError):
        ProcessSpec("riffle", 3)
    with pytest.raises(ShuffleValidationError):
        ProcessSpec(CYCLE_TRANSPOSITION, 2)
    with pytest.raises(ShuffleValidationError):
        ProcessSpec(WASH1D_LONG, 3, p=1)
    with pytest.raises(ShuffleValidationError):
        ProcessSpec(WASH1D_LONG, 3, merge="riffle")
    with pytest.raises(ShuffleValidationError):
        ProcessSpec(WASH1D, 3, d=2)
    with pytest.raises(ShuffleValidationError):
        ProcessSpec(WASH_GRID, 3, d=0)


def test_spec_parameters():
    spec = ProcessSpec(WASH1D_LONG, 3, p="1/3")
    assert spec.p == Fraction(1, 3)
    assert spec.merge == "gsr"
    assert ProcessSpec(WASH1D_LONG, 3, p=0.5).p == Fraction(1, 2)
    assert ProcessSpec(WASH_GRID, 4).d == 1
    assert ProcessSpec.from_dict(spec.to_dict()) == spec
    assert spec.with_n(4).n == 4
    assert spec.with_n(4).p == Fraction(1, 3)
    assert len({spec, ProcessSpec(WASH1D_LONG, 3, p=Fraction(1, 3))}) == 1


@pytest.mark.parametrize("family", FAMILIES)
def test_build_process(family):
    process = build_process(family, 3)
    assert process.family == family
    assert process.n == 3


def test_canonical_starts():
    assert process_for(ProcessSpec(WASH1D, 3)).canonical_start() == ((1,), (2,), (3,))
    assert process_for(ProcessSpec(ADJ_TRANSPOSITION, 4)).canonical_start() == Permutation.identity(4)
    grid = process_for(ProcessSpec(WASH_GRID, 3, d=2))
    start = grid.canonical_start()
    assert len(start) == 9
    assert start[:3] == ((1,), (2,), (3,))
    assert all(p == () for p in start[3:])


def test_wash1d_step(wash3):
    process = process_for(wash3)
    start = process.canonical_start()
    nxt, events = process.replay_step(start, (2, "L", 0))
    assert nxt == ((2, 1), (), (3,))
    assert [e.pair for e in events] == [Transposition(1, 2)]
    assert events[0].kind == SAME_PILE
    assert process.record_probability(start, (2, "L", 0)) == Fraction(1, 3) * Fraction(1, 4) * Fraction(1, 2)
    assert process.project(nxt) == Permutation([2, 1, 3])


def test_wash1d_wall(wash3):
    process = process_for(wash3)
    start = process.canonical_start()
    nxt, events = process.replay_step(start, (1, "L", None))
    assert nxt == start
    assert events == []
    with pytest.raises(InfeasibleRecordError):
        process.replay_step(start, (1, "L", 0))
    with pytest.raises(InfeasibleRecordError):
        process.replay_step(start, (1, "R", 5))


def test_wash_grid_line_matches_wash1d(wash3):
    grid = process_for(ProcessSpec(WASH_GRID, 3, d=1))
    line = process_for(wash3)
    assert grid.canonical_start() == line.canonical_start()
    assert grid.project(((2, 1), (), (3,))) == line.project(((2, 1), (), (3,)))
    nxt, _ = grid.replay_step(grid.canonical_start(), (2, 0, 0))
    assert nxt == ((2, 1), (), (3,))


def test_wash1d_long_still_step():
    process = process_for(ProcessSpec(WASH1D_LONG, 3))
    start = process.canonical_start()
    nxt, events = process.replay_step(start, ((0, 0, 0), (0, 0, 0), (), ()))
    assert nxt == start
    assert events == []


def test_wash1d_long_overtake():
    process = process_for(ProcessSpec(WASH1D_LONG, 3))
    start = process.canonical_start()
    # card 1 runs to the wall, passing 2 and 3
    record = next(
        tr.record for tr in process.enumerate_transitions(start) if tr.record[0] == (2, 0, 0) and tr.record[1] == (0, 0, 0)
    )
    nxt, events = process.replay_step(start, record)
    assert sorted(nxt[2]) == [1, 3]
    overtakes = {e.pair for e in events if e.kind == OVERTAKE}
    assert overtakes == {Transposition(1, 2), Transposition(1, 3)}


def test_random_to_random_step(r2r3):
    process = process_for(r2r3)
    nxt, events = process.replay_step(Permutation.identity(3), (1, 3))
    assert nxt == Permutation([2, 3, 1])
    assert events == []
    nxt, events = process.replay_step(Permutation.identity(3), (1, 1))
    assert nxt == Permutation.identity(3)
    assert [e.pair for e in events] == [Transposition(1, 2)]


def test_cycle_step(cycle3):
    process = process_for(cycle3)
    deck = Permutation([3, 1, 2])
    nxt, events = process.replay_step(deck, "id")
    assert nxt == deck
    assert [(e.pair, e.kind) for e in events] == [(Transposition(1, 3), TOP_TWO)]
    nxt, events = process.replay_step(deck, "cycle")
    assert nxt == Permutation([2, 3, 1])
    assert events == []


def test_step_distributions(adj3, r2t3):
    wash = process_for(ProcessSpec(WASH1D, 2))
    assert sum(tr.probability for tr in wash.enumerate_transitions(wash.canonical_start())) == 1
    dist = process_for(adj3).step_distribution(Permutation.identity(3))
    assert dist == {
        Permutation.identity(3): Fraction(1, 2),
        Permutation([2, 1, 3]): Fraction(1, 4),
        Permutation([1, 3, 2]): Fraction(1, 4),
    }
    transitions = process_for(r2t3).enumerate_transitions(Permutation.identity(3))
    assert len(transitions) == 3
    assert {tr.probability for tr in transitions} == {Fraction(1, 3)}


@pytest.mark.parametrize("spec", SMALL_SPECS, ids=repr)
def test_sampled_records_replay(spec):
    process = process_for(spec)
    rng = replica_rng(11, 0, 0)
    state = process.canonical_start()
    for t in range(1, 8):
        record, nxt, events = process.sample_step(state, rng, time=t)
        again, again_events = process.replay_step(state, record, time=t)
        assert again == nxt
        assert again_events == events
        assert all(e.time == t for e in events)
        assert process.record_probability(state, record) > 0
        state = nxt


@pytest.mark.parametrize("spec", SMALL_SPECS, ids=repr)
def test_replay_determinism_long_run(spec):
    process = process_for(spec)
    for r in range(100):
        rng = replica_rng(12, 0, r)
        state = process.canonical_start()
        for t in range(1, 1001):
            record, nxt, events = process.sample_step(state, rng, time=t)
            again, again_events = process.replay_step(state, record, time=t)
            assert again == nxt
            assert again_events == events
            state = nxt


@pytest.mark.parametrize("spec", SMALL_SPECS, ids=repr)
def test_transitions_normalized(spec):
    process = process_for(spec)
    start = process.canonical_start()
    assert sum(tr.probability for tr in process.enumerate_transitions(start)) == 1


@pytest.mark.parametrize("t", [0, 1, 2])
def test_path_enumeration_normalized(wash3, t):
    total = sum(p.probability for p in enumerate_paths(wash3, t))
    assert total == 1


def test_simulated_view_path_replays(wash3):
    path = simulate(wash3, 6, replica_rng(5, 0, 0), view=True)
    assert len(path) == 6
    assert path.gather is not None
    replayed = replay(path)
    assert replayed.probability > 0
    assert len(replayed.states) == 7
    assert replayed.end.n == 3
    assert path.to_json()["view"] is True


def test_batch_matrix_shape():
    matrix = first_interaction_matrix(ProcessSpec(WASH1D, 4), 50, batch_rng(1, 0))
    assert matrix.shape == (50, 4, 4)
    assert np.all(np.diagonal(matrix, axis1=1, axis2=2) == 0)
    assert np.array_equal(matrix, np.swapaxes(matrix, 1, 2))
    assert np.isfinite(matrix).all()
    times = pair_times(matrix)
    assert times.shape == (50, 6)
    assert np.array_equal(all_pairs_times(matrix), times.max(axis=1))


def test_batch_adjacent_two_cards():
    matrix = first_interaction_matrix(ProcessSpec(ADJ_TRANSPOSITION, 2), 20, batch_rng(1, 0))
    assert np.all(matrix[:, 0, 1] == 1)


def test_batch_cycle_top_pair_rate():
    matrix = first_interaction_matrix(ProcessSpec(CYCLE_TRANSPOSITION, 3), 4000, batch_rng(2, 0))
    # the top two cards interact at step 1 unless the n-cycle is drawn
    assert abs(np.mean(matrix[:, 0, 1] == 1) - 2 / 3) < 0.04


@pytest.mark.parametrize("family", [WASH1D, WASH1D_LONG, WASH_GRID, ADJ_TRANSPOSITION, CYCLE_TRANSPOSITION, RANDOM_TO_RANDOM])
def test_batch_all_families_finish(family):
    matrix = first_interaction_matrix(ProcessSpec(family, 4), 30, batch_rng(3, 0))
    assert np.isfinite(matrix).all()


def test_batch_errors_and_cap():
    with pytest.raises(ShuffleValidationError):
        first_interaction_matrix(ProcessSpec(RANDOM_TO_TOP, 3), 10, batch_rng(1, 0))
    with pytest.raises(ShuffleValidationError):
        first_interaction_matrix(ProcessSpec(WASH1D, 3), 0, batch_rng(1, 0))
    capped = first_interaction_matrix(ProcessSpec(WASH1D, 3), 5, batch_rng(1, 0), t_max=0)
    assert np.isinf(pair_times(capped)).all()
    assert default_t_max(ProcessSpec(WASH1D, 8)) > default_t_max(ProcessSpec(RANDOM_TO_RANDOM, 8))


def test_batch_single_card():
    matrix = first_interaction_matrix(ProcessSpec(WASH1D, 1), 4, batch_rng(1, 0))
    assert np.array_equal(all_pairs_times(matrix), np.zeros(4))


def test_all_cards_chosen():
    assert all_cards_chosen([1, 1, 2, 3, 2], 3) == 4
    assert all_cards_chosen([1, 2, 1], 3) is None
    assert all_cards_chosen([], 1) is None


def test_batch_reproducible():
    spec = ProcessSpec(WASH1D, 4)
    first = first_interaction_matrix(spec, 40, batch_rng(6, 1))
    again = first_interaction_matrix(spec, 40, batch_rng(6, 1))
    assert np.array_equal(first, again)
