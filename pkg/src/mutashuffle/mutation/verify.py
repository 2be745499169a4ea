"""Exhaustive small-n verification of the relabeling bijection and the mutation maps."""
import collections
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional

from ..errors import EmptyConditionError, GuardExceededError, RuleUnsatisfiedError, ShuffleValidationError
from ..perm import Permutation, Transposition, all_permutations, compose
from ..processes import RANDOM_TO_TOP, ProcessSpec
from ..processes.exact import check_exact_guard
from ..processes.paths import enumerate_paths, process_for, replay
from ..processes.walks import all_cards_chosen
from ..stopping import ALL_PAIRS, SEQUENTIAL, StoppingRule
from .maps import mutate_fast, mutate_fast_inverse, mutate_slow, mutate_slow_inverse

logger = logging.getLogger(__name__)

DEFAULT_PATH_LIMIT = 500_000

FAST = "fast"
SLOW = "slow"
MAPS = {
    FAST: (ALL_PAIRS, mutate_fast, mutate_fast_inverse),
    SLOW: (SEQUENTIAL, mutate_slow, mutate_slow_inverse),
}


def _paths(spec: ProcessSpec, t, limit=DEFAULT_PATH_LIMIT, view=True):
    check_exact_guard(spec)
    for count, item in enumerate(enumerate_paths(spec, t, view=view), start=1):
        if count > limit:
            raise GuardExceededError(f"More than {limit} paths of length {t} for {spec!r}")
        yield item


def _flat(enumerated):
    return [ev for step in enumerated.events for ev in step]


def _satisfied(rule, enumerated, n):
    if rule is None:
        return True
    return StoppingRule.of(rule).evaluate(_flat(enumerated), n).achieved


@dataclass
class IjswapReport:
    pair: Transposition
    paths_interacted: int = 0
    mass: Fraction = Fraction(0)
    max_discrepancy: Fraction = Fraction(0)
    twin_closed: bool = True
    by_end: Dict[Permutation, Fraction] = field(default_factory=dict)

    @property
    def holds(self):
        return self.max_discrepancy == 0

    def to_json(self):
        return {
            "pair": self.pair.to_json(),
            "paths_interacted": self.paths_interacted,
            "mass": self.mass,
            "max_discrepancy": self.max_discrepancy,
            "twin_closed": self.twin_closed,
            "holds": self.holds,
        }


def verify_ijswap_bijection(spec: ProcessSpec, n, t, i, j) -> IjswapReport:
    """Mass of paths in which i and j interact, ending at pi versus at (i j).pi.

    Equality is expected for families whose events are carried along by relabeling;
    `twin_closed` says whether that applies, the discrepancy is reported regardless.
    """
    spec = spec.with_n(n)
    pair = Transposition(i, j)
    g = pair.as_permutation(n)
    process = process_for(spec, True)
    report = IjswapReport(pair, twin_closed=process.relabel_equivariant and process.has_detector)
    mass = collections.defaultdict(Fraction)
    for enumerated in _paths(spec, t):
        if any(ev.pair == pair for ev in _flat(enumerated)):
            report.paths_interacted += 1
            mass[enumerated.end] += enumerated.probability
    report.by_end = dict(mass)
    report.mass = sum(mass.values(), Fraction(0))
    for pi in all_permutations(n):
        gap = abs(mass.get(pi, Fraction(0)) - mass.get(compose(g, pi), Fraction(0)))
        report.max_discrepancy = max(report.max_discrepancy, gap)
    logger.info(f"ijswap {pair} on {spec!r}, t={t}: discrepancy {report.max_discrepancy}")
    return report


@dataclass
class ConditionedDistribution:
    distribution: Dict[Permutation, Fraction]
    mass: Fraction

    def is_uniform(self):
        n = next(iter(self.distribution)).n
        perms = all_permutations(n)
        return all(self.distribution.get(p, Fraction(0)) == self.distribution.get(perms[0], Fraction(0)) for p in perms)

    def to_json(self):
        return {
            "mass": self.mass,
            "distribution": {str(p): q for p, q in sorted(self.distribution.items())},
        }


def conditioned_distribution(spec: ProcessSpec, n, t, rule=ALL_PAIRS) -> ConditionedDistribution:
    """Exact law of the end permutation given that `rule` is satisfied by time t.

    ``rule=None`` conditions on nothing.

    Raises
    ------
    EmptyConditionError
        When no path of length t satisfies the rule.
    """
    spec = spec.with_n(n)
    dist = collections.defaultdict(Fraction)
    for enumerated in _paths(spec, t):
        if _satisfied(rule, enumerated, n):
            dist[enumerated.end] += enumerated.probability
    mass = sum(dist.values(), Fraction(0))
    if mass == 0:
        raise EmptyConditionError(f"empty condition: no path of length {t} satisfies {rule}")
    return ConditionedDistribution({p: q / mass for p, q in dist.items()}, mass)


def verify_mutation_maps(spec: ProcessSpec, n, t, rule=FAST, targets=None):
    """Runs a mutation map and its inverse over every satisfying path and every target.

    Returns
    -------
    dict
        ``paths_total, paths_satisfying, roundtrip_failures, end_mismatch, prob_mismatch,
        injectivity_failures, cross_end_collisions, count_inequality_failures``. Every failure
        count is 0 when, for each source end, the map is an injection into the paths ending at
        each target. Paths with different ends may share an image; those are counted in
        ``cross_end_collisions`` and are not failures.
    """
    if rule not in MAPS:
        raise ShuffleValidationError(f"Unknown mutation map {rule}. Must be one of {', '.join(MAPS)}")
    stopping_rule, forward, inverse = MAPS[rule]
    spec = spec.with_n(n)
    targets = all_permutations(n) if targets is None else list(targets)
    report = dict(
        paths_total=0,
        paths_satisfying=0,
        roundtrip_failures=0,
        end_mismatch=0,
        prob_mismatch=0,
        injectivity_failures=0,
        cross_end_collisions=0,
        count_inequality_failures=0,
    )
    satisfying = []
    all_mass = collections.defaultdict(Fraction)
    sat_mass = collections.defaultdict(Fraction)
    for enumerated in _paths(spec, t):
        report["paths_total"] += 1
        all_mass[enumerated.end] += enumerated.probability
        if _satisfied(stopping_rule, enumerated, n):
            satisfying.append(enumerated)
            sat_mass[enumerated.end] += enumerated.probability
    report["paths_satisfying"] = len(satisfying)
    logger.info(f"Verifying the {rule} map on {len(satisfying)} paths of {spec!r}, t={t}")

    for target in targets:
        # image -> source ends already mapped onto it
        images = collections.defaultdict(set)
        for enumerated in satisfying:
            mutated = forward(enumerated.path, target)
            replayed = replay(mutated)
            if replayed.end != target:
                report["end_mismatch"] += 1
            if replayed.probability != enumerated.probability:
                report["prob_mismatch"] += 1
            ends = images[mutated]
            if enumerated.end in ends:
                report["injectivity_failures"] += 1
            elif ends:
                report["cross_end_collisions"] += 1
            ends.add(enumerated.end)
            try:
                restored = inverse(mutated, enumerated.end, target)
            except RuleUnsatisfiedError:
                restored = None
            if restored != enumerated.path:
                report["roundtrip_failures"] += 1
        for pi in all_permutations(n):
            if sat_mass.get(pi, Fraction(0)) > all_mass.get(target, Fraction(0)):
                report["count_inequality_failures"] += 1
    return report


@dataclass
class UniformityReport:
    mass: Fraction
    distribution: Dict[Permutation, Fraction]
    uniform: bool
    stopping_time: Optional[str] = "all-cards-chosen"

    def to_json(self):
        return {
            "mass": self.mass,
            "uniform": self.uniform,
            "distribution": {str(p): q for p, q in sorted(self.distribution.items())},
        }


def verify_random_to_top_uniform(n, t) -> UniformityReport:
    """Paths of random-to-top in which every card was chosen by time t end uniformly."""
    spec = ProcessSpec(RANDOM_TO_TOP, n)
    dist = collections.defaultdict(Fraction)
    for enumerated in _paths(spec, t, view=False):
        if all_cards_chosen(enumerated.path.steps, n) is not None:
            dist[enumerated.end] += enumerated.probability
    mass = sum(dist.values(), Fraction(0))
    perms = all_permutations(n)
    uniform = mass > 0 and all(dist.get(p, Fraction(0)) == mass / len(perms) for p in perms)
    return UniformityReport(mass, {p: q / mass for p, q in dist.items()} if mass else {}, uniform)
