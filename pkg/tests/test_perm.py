import itertools

import numpy as np
import pytest

from mutashuffle.errors import GuardExceededError, IncompleteSequenceError, ShuffleValidationError
from mutashuffle.perm import (
    CycleDecomposition,
    Permutation,
    StarVector,
    SubsequenceMask,
    Transposition,
    TranspositionSequence,
    act_on_labels,
    all_permutations,
    all_transpositions,
    cayley_length,
    compose,
    cycles,
    evaluate_star,
    evaluate_subsequence,
    greedy_subsequence_factor,
    invert,
    length_decreases,
    min_spanning_prefix,
    reachable_set,
    spanning_experiment,
    star_factor,
)
from mutashuffle.utils.seeding import replica_rng


def t3(i, j):
    return Permutation.transposition(3, i, j)


def test_permutation_validation():
    with pytest.raises(ShuffleValidationError):
        Permutation([1, 1, 2])
    with pytest.raises(ShuffleValidationError):
        Permutation([])
    assert Permutation.from_text("[2,1,3]") == Permutation([2, 1, 3])
    assert str(Permutation([2, 1, 3])) == "[2,1,3]"


def test_transposition_normalized():
    t = Transposition(3, 1)
    assert t.pair == (1, 3)
    assert t == Transposition.of((1, 3))
    with pytest.raises(ShuffleValidationError):
        Transposition(2, 2)
    with pytest.raises(ShuffleValidationError):
        Transposition(1, 4).as_permutation(3)


def test_compose_against_table(s3):
    # S_3 multiplication from dictionaries, right factor first
    table = {}
    for a, b in itertools.product(s3, s3):
        fa = dict(enumerate(a.map, start=1))
        fb = dict(enumerate(b.map, start=1))
        table[a, b] = Permutation(fa[fb[x]] for x in range(1, 4))
    for (a, b), ab in table.items():
        assert compose(a, b) == ab
    assert compose(t3(1, 2), t3(2, 3)) == Permutation([2, 3, 1])
    assert compose(t3(1, 2), t3(2, 3)) == Permutation.from_cycles(3, [(1, 2, 3)])


def test_compose_identity_and_inverse():
    pi = Permutation([3, 1, 4, 2])
    assert compose(Permutation.identity(4), pi) == pi
    assert compose(pi, invert(pi)).is_identity()
    with pytest.raises(ShuffleValidationError):
        compose(pi, Permutation.identity(3))


def test_invert():
    assert invert(Permutation.identity(3)).is_identity()
    assert invert(t3(1, 2)) == t3(1, 2)
    assert invert(Permutation.from_cycles(3, [(1, 2, 3)])) == Permutation.from_cycles(3, [(1, 3, 2)])


def test_label_action():
    pi = Permutation([2, 3, 1])
    # card 1 is renamed 2 and card 2 is renamed 1
    assert act_on_labels(t3(1, 2), pi) == Permutation([1, 3, 2])


@pytest.mark.parametrize(
    "pi,text,n_cycles",
    [
        (Permutation.identity(3), "(1)(2)(3)", 3),
        (Permutation.from_cycles(4, [(1, 2, 3, 4)]), "(1 2 3 4)", 1),
        (Permutation([2, 1, 4, 3]), "(1 2)(3 4)", 2),
    ],
)
def test_cycles(pi, text, n_cycles):
    dec = cycles(pi)
    assert str(dec) == text
    assert len(dec) == n_cycles
    assert dec.to_permutation() == pi
    assert CycleDecomposition.from_text(pi.n, text) == dec


@pytest.mark.parametrize(
    "pi,length",
    [
        (Permutation.identity(4), 0),
        (Permutation.from_cycles(4, [(1, 2, 3, 4)]), 3),
        (Permutation([2, 1, 4, 3]), 2),
    ],
)
def test_cayley_length(pi, length):
    assert cayley_length(pi) == length


def test_length_decreases():
    three_cycle = Permutation.from_cycles(3, [(1, 2, 3)])
    assert length_decreases(three_cycle, Transposition(1, 2))
    for t in all_transpositions(4):
        assert not length_decreases(Permutation.identity(4), t)
    a = t3(1, 2)
    t = Transposition(1, 3)
    assert not length_decreases(a, t)
    assert cayley_length(compose(t.as_permutation(3), a)) == cayley_length(a) + 1


def test_length_decreases_matches_cayley_length():
    for pi in all_permutations(4):
        for t in all_transpositions(4):
            left = cayley_length(compose(t.as_permutation(4), pi))
            right = cayley_length(compose(pi, t.as_permutation(4)))
            expected = cayley_length(pi) - 1 if length_decreases(pi, t) else cayley_length(pi) + 1
            assert left == right == expected


def test_star_factor_examples():
    assert star_factor(Permutation.identity(4)).a == (1, 2, 3, 4)
    assert star_factor(Permutation([2, 1])).a == (1, 1)
    assert star_factor(Permutation.from_cycles(3, [(1, 2, 3)])).a == (1, 1, 2)
    assert evaluate_star(StarVector(3, (1, 2, 3))).is_identity()
    assert evaluate_star(StarVector(2, (1, 1))) == Permutation([2, 1])
    with pytest.raises(ShuffleValidationError):
        StarVector(3, (1, 3, 3))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_star_round_trip(n):
    for pi in all_permutations(n):
        v = star_factor(pi)
        assert evaluate_star(v) == pi
        assert len(v.factors()) == sum(1 for i, a in enumerate(v.a, start=1) if a != i)


def test_greedy_examples():
    seq = TranspositionSequence(3, ((1, 2), (1, 3), (2, 3)))
    assert greedy_subsequence_factor(seq, Permutation.identity(3)).eps == (0, 0, 0)
    assert greedy_subsequence_factor(seq, t3(2, 3)).eps == (0, 0, 1)
    mask = greedy_subsequence_factor(seq, Permutation([2, 3, 1]))
    assert mask.eps == (1, 0, 1)
    assert evaluate_subsequence(seq, mask) == Permutation([2, 3, 1])


def test_greedy_incomplete_sequence():
    seq = TranspositionSequence(3, ((1, 2), (1, 3)))
    with pytest.raises(IncompleteSequenceError, match=r"\(2 3\)"):
        greedy_subsequence_factor(seq, Permutation.identity(3))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_greedy_completeness(n):
    perms = all_permutations(n)
    for k in range(20):
        seq = TranspositionSequence.all_distinct(n, replica_rng(7, n, k))
        for pi in perms:
            mask = greedy_subsequence_factor(seq, pi)
            assert evaluate_subsequence(seq, mask) == pi
            assert sum(mask.eps) == cayley_length(pi)


def test_greedy_with_repeats():
    seq = TranspositionSequence(3, ((1, 2), (1, 2), (2, 3), (1, 3), (1, 2)))
    for pi in all_permutations(3):
        assert evaluate_subsequence(seq, greedy_subsequence_factor(seq, pi)) == pi


def test_evaluate_subsequence():
    seq = TranspositionSequence(3, ((1, 2), (1, 3)))
    assert evaluate_subsequence(seq, SubsequenceMask((0, 0))).is_identity()
    assert evaluate_subsequence(seq, SubsequenceMask((0, 1))) == t3(1, 3)
    assert evaluate_subsequence(seq, SubsequenceMask((1, 1))) == Permutation([3, 1, 2])
    with pytest.raises(ShuffleValidationError):
        evaluate_subsequence(seq, SubsequenceMask((1,)))


def test_reachable_set(s3):
    assert reachable_set(TranspositionSequence(3)) == {Permutation.identity(3)}
    assert reachable_set(TranspositionSequence(2, ((1, 2),))) == {
        Permutation.identity(2),
        Permutation([2, 1]),
    }
    for order in itertools.permutations(all_transpositions(3)):
        assert reachable_set(TranspositionSequence(3, order)) == set(s3)


def test_min_spanning_prefix():
    assert min_spanning_prefix(TranspositionSequence.all_distinct(3)) == 3
    assert min_spanning_prefix(TranspositionSequence(3, ((1, 2),) * 10)) is None
    with pytest.raises(GuardExceededError):
        min_spanning_prefix(TranspositionSequence.all_distinct(9))


def test_spanning_experiment():
    frame = spanning_experiment([3, 4], 25, base_seed=3)
    assert list(frame.columns) == ["n", "seed", "min_spanning_prefix", "coupon_collector_steps"]
    assert len(frame) == 50
    assert (frame["min_spanning_prefix"] <= frame["coupon_collector_steps"]).all()
    assert (frame[frame["n"] == 3]["min_spanning_prefix"] >= 3).all()
    again = spanning_experiment([3, 4], 25, base_seed=3)
    assert np.array_equal(frame.to_numpy(), again.to_numpy())
