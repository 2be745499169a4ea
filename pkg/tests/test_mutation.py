from fractions import Fraction

import pytest

from mutashuffle.errors import EmptyConditionError, RuleUnsatisfiedError, ShuffleValidationError
from mutashuffle.mutation import (
    FAST,
    SLOW,
    RelabelAction,
    conditioned_distribution,
    mutate_fast,
    mutate_fast_inverse,
    mutate_slow,
    mutate_slow_inverse,
    plan_fast,
    relabel_suffix,
    verify_ijswap_bijection,
    verify_mutation_maps,
    verify_random_to_top_uniform,
)
from mutashuffle.mutation.verify import MAPS
from mutashuffle.perm import Permutation, Transposition, all_permutations, all_transpositions, compose
from mutashuffle.processes import Path, ProcessSpec, RANDOM_TO_RANDOM, WASH1D, WASH1D_LONG, enumerate_paths, replay, simulate
from mutashuffle.processes.paths import flat_events
from mutashuffle.processes.walks import GEN_CYCLE, GEN_ID
from mutashuffle.stopping import ALL_PAIRS, all_pairs_time, sequential_times
from mutashuffle.utils.seeding import replica_rng

START = ((1,), (2,), (3,))
GATHER = ((), (1, 2), (3,))


@pytest.fixture
def hand_path(wash3):
    # card 1 joins card 2, then card 3 stays put
    return Path(wash3, START, ((1, "R"), (3, "S")), GATHER, view=True)


@pytest.fixture(scope="module")
def satisfying_path():
    for enumerated in enumerate_paths(ProcessSpec(WASH1D, 3), 3):
        if all_pairs_time(flat_events(replay(enumerated.path)), 3).achieved:
            return enumerated.path
    raise AssertionError("no path of length 3 covers every pair")


def test_relabel_at_interaction(hand_path):
    before = replay(hand_path)
    assert before.end == Permutation.identity(3)
    assert before.probability == Fraction(1, 12) * Fraction(1, 6) * Fraction(1, 2)
    moved = relabel_suffix(hand_path, RelabelAction(1, Transposition(1, 2)))
    after = replay(moved)
    assert after.probability == before.probability
    assert after.end == compose(Transposition(1, 2).as_permutation(3), before.end)
    assert moved.gather == ((), (2, 1), (3,))


def test_relabel_is_involution(hand_path):
    action = RelabelAction(1, Transposition(1, 2))
    assert relabel_suffix(relabel_suffix(hand_path, action), action) == hand_path


def test_relabel_at_last_step(hand_path):
    moved = relabel_suffix(hand_path, RelabelAction(2, Transposition(1, 2)))
    assert moved.steps == hand_path.steps
    assert moved.gather == ((), (2, 1), (3,))


def test_relabel_rejects_bad_actions(hand_path):
    with pytest.raises(ShuffleValidationError):
        relabel_suffix(hand_path, RelabelAction(3, Transposition(1, 2)))
    with pytest.raises(ShuffleValidationError):
        relabel_suffix(hand_path, RelabelAction(0, Transposition(1, 2)))
    with pytest.raises(ShuffleValidationError):
        # cards 1 and 3 never share a pile
        relabel_suffix(hand_path, RelabelAction(1, Transposition(1, 3)))


def test_ijswap_three_cards(wash3):
    for pair in all_transpositions(3):
        report = verify_ijswap_bijection(wash3, 3, 3, pair.i, pair.j)
        assert report.holds
        assert report.twin_closed
        assert report.paths_interacted > 0


def test_ijswap_edge_cases(wash3):
    empty = verify_ijswap_bijection(wash3, 3, 0, 1, 2)
    assert empty.paths_interacted == 0
    assert empty.holds
    assert verify_ijswap_bijection(wash3, 2, 2, 1, 2).holds


def test_counterexample(wash3, s3):
    result = conditioned_distribution(wash3, 3, 3)
    probs = [result.distribution.get(p, Fraction(0)) for p in s3]
    assert sum(probs) == 1
    assert max(probs) > min(probs)
    assert not result.is_uniform()
    assert 0 < result.mass < 1


def test_conditioned_edge_cases(wash3):
    free = conditioned_distribution(wash3, 3, 0, rule=None)
    assert free.distribution == {Permutation.identity(3): Fraction(1)}
    with pytest.raises(EmptyConditionError):
        conditioned_distribution(wash3, 3, 1)


def test_fast_map_keeps_target_end(satisfying_path):
    end = replay(satisfying_path).end
    assert mutate_fast(satisfying_path, end) == satisfying_path
    assert plan_fast(satisfying_path, end).actions == []


def test_fast_map_round_trip(satisfying_path):
    source = replay(satisfying_path)
    for target in all_permutations(3):
        mutated = mutate_fast(satisfying_path, target)
        replayed = replay(mutated)
        assert replayed.end == target
        assert replayed.probability == source.probability
        assert mutate_fast_inverse(mutated, source.end, target) == satisfying_path


def test_fast_inverse_rejects_wrong_end(satisfying_path):
    source_end = replay(satisfying_path).end
    other = next(p for p in all_permutations(3) if p != source_end)
    with pytest.raises(RuleUnsatisfiedError, match="not in image"):
        mutate_fast_inverse(satisfying_path, source_end, other)


def test_fast_map_needs_rule(hand_path):
    with pytest.raises(RuleUnsatisfiedError, match="all-pairs rule unsatisfied"):
        mutate_fast(hand_path, Permutation.identity(3))
    with pytest.raises(RuleUnsatisfiedError, match="sequential rule unsatisfied"):
        mutate_slow(hand_path, Permutation.identity(3))


@pytest.mark.parametrize("spec", [ProcessSpec(RANDOM_TO_RANDOM, 3), ProcessSpec(WASH1D_LONG, 3)], ids=repr)
def test_maps_unavailable(spec):
    path = simulate(spec, 3, replica_rng(1), view=True)
    with pytest.raises(ShuffleValidationError):
        mutate_fast(path, Permutation.identity(3))


def test_maps_need_view_paths(wash3):
    path = simulate(wash3, 3, replica_rng(1), view=False)
    with pytest.raises(ShuffleValidationError):
        mutate_fast(path, Permutation.identity(3))


@pytest.mark.parametrize("name,t", [("wash3", 3), ("cycle3", 5)])
def test_fast_map_exhaustive(name, t, request):
    report = verify_mutation_maps(request.getfixturevalue(name), 3, t, FAST)
    assert report["paths_satisfying"] > 0
    for key in ("roundtrip_failures", "end_mismatch", "prob_mismatch", "injectivity_failures", "count_inequality_failures"):
        assert report[key] == 0, key
    # distinct source ends may share an image
    assert report["cross_end_collisions"] > 0


def test_slow_map_exhaustive(wash3):
    with pytest.raises(EmptyConditionError):
        conditioned_distribution(wash3, 3, 3, rule="sequential")
    report = verify_mutation_maps(wash3, 3, 4, SLOW)
    assert report["paths_satisfying"] > 0
    for key in ("roundtrip_failures", "end_mismatch", "prob_mismatch", "injectivity_failures", "count_inequality_failures"):
        assert report[key] == 0, key
    assert report["cross_end_collisions"] > 0


def test_unknown_map(wash3):
    with pytest.raises(ShuffleValidationError):
        verify_mutation_maps(wash3, 3, 2, "medium")


def test_random_to_top_uniform():
    report = verify_random_to_top_uniform(3, 4)
    assert report.uniform
    assert report.mass > 0
    assert set(report.distribution.values()) == {Fraction(1, 6)}


def test_slow_map_round_trip(wash3):
    path = next(
        e.path
        for e in enumerate_paths(wash3, 4)
        if sequential_times(flat_events(replay(e.path)), 3).achieved
    )
    source = replay(path)
    for target in all_permutations(3):
        mutated = mutate_slow(path, target)
        assert replay(mutated).end == target
        assert replay(mutated).probability == source.probability
        assert mutate_slow_inverse(mutated, source.end, target) == path


def test_image_collisions_only_cross_source_ends(cycle3):
    satisfying = [
        e for e in enumerate_paths(cycle3, 5) if all_pairs_time(flat_events(replay(e.path)), 3).achieved
    ]
    target = Permutation.identity(3)
    images = {}
    for e in satisfying:
        images.setdefault(mutate_fast(e.path, target), []).append(e.end)
    shared = [ends for ends in images.values() if len(ends) > 1]
    assert shared
    for ends in shared:
        assert len(set(ends)) == len(ends)


def test_failed_inverse_counts_as_roundtrip_failure(wash3, monkeypatch):
    def not_in_image(path, source_end, target):
        raise RuleUnsatisfiedError("not in image")

    monkeypatch.setitem(MAPS, FAST, (ALL_PAIRS, mutate_fast, not_in_image))
    target = Permutation.identity(3)
    report = verify_mutation_maps(wash3, 3, 3, FAST, targets=[target])
    assert report["paths_satisfying"] > 0
    assert report["roundtrip_failures"] == report["paths_satisfying"]
    assert report["end_mismatch"] == 0


def test_slow_map_on_cycle_transposition(cycle3):
    # windows close at t=3, 7 and 11
    steps = [GEN_ID, GEN_CYCLE] * 5 + [GEN_ID]
    path = next(enumerate_paths(cycle3, 0)).path.with_steps(steps)
    source = replay(path)
    assert sequential_times(flat_events(source), 3).sequential_times == [0, 3, 7, 11]
    for target in all_permutations(3):
        mutated = mutate_slow(path, target)
        assert replay(mutated).end == target
        assert replay(mutated).probability == source.probability == Fraction(1, 3**11)
        assert mutate_slow_inverse(mutated, source.end, target) == path
