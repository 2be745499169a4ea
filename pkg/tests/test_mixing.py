import math
from fractions import Fraction

import numpy as np
import pytest

from mutashuffle.errors import ShuffleValidationError
from mutashuffle.mixing import (
    ExactDistribution,
    ScalingSeries,
    distance_curve,
    distribution_by_paths,
    exact_distribution,
    mixing_time,
    scaling_experiment,
    scaling_fit,
    separation_distance,
    total_variation,
    verify_mutation_bound,
)
from mutashuffle.mixing.scaling import ALL_PAIRS_MEDIAN, PAIR_MEAN
from mutashuffle.perm import Permutation, all_permutations
from mutashuffle.processes import ProcessSpec, RANDOM_TO_RANDOM
from mutashuffle.stopping import SEQUENTIAL


def test_start_is_point_mass(wash3):
    law = exact_distribution(wash3, 3, 0)
    assert law == ExactDistribution.point_mass(Permutation.identity(3))
    assert law.probability(Permutation([2, 1, 3])) == 0


@pytest.mark.parametrize("t", [1, 2, 3])
def test_paths_agree_with_evolution(wash3, t):
    assert distribution_by_paths(wash3, 3, t) == exact_distribution(wash3, 3, t)


def test_distribution_validation():
    with pytest.raises(ShuffleValidationError):
        ExactDistribution({})
    with pytest.raises(ShuffleValidationError):
        ExactDistribution({Permutation.identity(2): Fraction(1, 2)})
    with pytest.raises(ShuffleValidationError):
        ExactDistribution({Permutation.identity(2): Fraction(1, 2), Permutation.identity(3): Fraction(1, 2)})


def test_separation():
    assert separation_distance(ExactDistribution.uniform(3)) == 0
    assert separation_distance(ExactDistribution.point_mass(Permutation.identity(3))) == 1
    lopsided = {Permutation.identity(2): Fraction(3, 4), Permutation([2, 1]): Fraction(1, 4)}
    assert separation_distance(lopsided) == Fraction(1, 2)


def test_total_variation():
    assert total_variation(ExactDistribution.uniform(3)) == 0
    assert total_variation(ExactDistribution.point_mass(Permutation.identity(3))) == Fraction(5, 6)
    lopsided = {Permutation.identity(2): Fraction(3, 4), Permutation([2, 1]): Fraction(1, 4)}
    assert total_variation(lopsided) == Fraction(1, 4)


def test_total_variation_below_separation():
    rng = np.random.default_rng(8)
    perms = all_permutations(3)
    for _ in range(50):
        weights = [int(w) for w in rng.integers(0, 5, size=len(perms))]
        if not sum(weights):
            continue
        law = {p: Fraction(w, sum(weights)) for p, w in zip(perms, weights)}
        assert total_variation(law) <= separation_distance(law)


def test_distance_curve(wash3):
    rows = distance_curve(wash3, 3, [0, 2, 6])
    assert [row["t"] for row in rows] == [0, 2, 6]
    assert rows[0]["sep"] == 1
    assert rows[0]["tv"] == Fraction(5, 6)
    assert rows[-1]["sep"] < rows[0]["sep"]


def test_mixing_time(r2t3):
    t = mixing_time(r2t3, 3, Fraction(1, 100))
    assert t is not None
    assert separation_distance(exact_distribution(r2t3, 3, t)) <= Fraction(1, 100)
    assert separation_distance(exact_distribution(r2t3, 3, t - 1)) > Fraction(1, 100)


@pytest.mark.parametrize("name,t_max", [("wash3", 8), ("cycle3", 12)])
def test_mutation_bound_all_pairs(name, t_max, request):
    report = verify_mutation_bound(request.getfixturevalue(name), 3, range(t_max + 1))
    assert report.holds
    first = report.rows[0]
    assert first["sep"] == 1
    assert first["p_T_gt_t"] == 1
    tails = [row["p_T_gt_t"] for row in report.rows]
    assert tails == sorted(tails, reverse=True)
    assert tails[-1] < 1


def test_mutation_bound_sequential(wash3):
    report = verify_mutation_bound(wash3, 3, range(9), rule=SEQUENTIAL)
    assert report.holds
    # no sequential stop before t=4 on three cards
    assert all(row["p_T_gt_t"] == 1 for row in report.rows[:4])
    assert report.rows[4]["p_T_gt_t"] < 1
    assert list(report.to_frame().columns) == ["t", "sep", "tv", "p_T_gt_t", "holds"]


def test_mutation_bound_needs_detector(r2t3):
    with pytest.raises(ShuffleValidationError):
        verify_mutation_bound(r2t3, 3, [1])


def test_scaling_fit_power_law():
    series = ScalingSeries(PAIR_MEAN, [(n, float(n**3), 0.0) for n in (8, 16, 32, 64)])
    fit = scaling_fit(series)
    assert fit.exponent == pytest.approx(3.0)
    assert fit.r2 == pytest.approx(1.0)


def test_scaling_fit_log_correction():
    series = ScalingSeries(PAIR_MEAN, [(n, n**3 * math.log(n), 0.0) for n in (8, 16, 32, 64)])
    fit = scaling_fit(series)
    assert fit.exponent > 3.1
    assert fit.corrected_exponent == pytest.approx(3.0)
    assert set(fit.to_json()) == {"exponent", "stderr", "r2", "corrected_exponent", "corrected_stderr"}


def test_scaling_series_validation():
    with pytest.raises(ShuffleValidationError):
        ScalingSeries(PAIR_MEAN, [(8, 1.0, 0.0), (8, 2.0, 0.0)])
    with pytest.raises(ShuffleValidationError):
        ScalingSeries(PAIR_MEAN, [(8, 0.0, 0.0)])
    with pytest.raises(ShuffleValidationError):
        scaling_fit(ScalingSeries(PAIR_MEAN, [(8, 1.0, 0.0), (16, 2.0, 0.0)]))
    with pytest.raises(ShuffleValidationError):
        scaling_fit(ScalingSeries(PAIR_MEAN, [(1, 1.0, 0.0), (2, 2.0, 0.0), (4, 3.0, 0.0)]))


@pytest.mark.parametrize("statistic", [PAIR_MEAN, ALL_PAIRS_MEDIAN])
def test_scaling_experiment(statistic):
    series = scaling_experiment(ProcessSpec(RANDOM_TO_RANDOM, 4), [4, 8, 16], replicas=40, seed=9, statistic=statistic)
    assert [p[0] for p in series.points] == [4, 8, 16]
    assert series.points[-1][1] > series.points[0][1]
    assert all(p[2] >= 0 for p in series.points)
    again = scaling_experiment(lambda n: ProcessSpec(RANDOM_TO_RANDOM, n), [4, 8, 16], replicas=40, seed=9, statistic=statistic)
    assert again.points == series.points


def test_scaling_experiment_errors():
    spec = ProcessSpec(RANDOM_TO_RANDOM, 4)
    with pytest.raises(ShuffleValidationError):
        scaling_experiment(spec, [4, 8], replicas=10, statistic="pair_max")
    with pytest.raises(ShuffleValidationError):
        scaling_experiment(spec, [4, 8], replicas=1)
