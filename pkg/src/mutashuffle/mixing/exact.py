"""Exact laws of the deck after t steps, their distances to uniform and the mutation bound."""
import collections
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List

import pandas as pd

from ..errors import ShuffleValidationError
from ..perm import Permutation, all_permutations
from ..processes import ProcessSpec
from ..processes.exact import check_exact_guard, evolve
from ..processes.paths import enumerate_paths, process_for
from ..stopping import ALL_PAIRS, StoppingRule

logger = logging.getLogger(__name__)

DEFAULT_T_GRID = tuple(range(0, 9))


class ExactDistribution(object):
    """Law of a random permutation of n cards, stored on its support."""

    def __init__(self, support: Dict[Permutation, Fraction], n=None):
        support = {p: q for p, q in support.items() if q != 0}
        if not support:
            raise ShuffleValidationError("A distribution needs a nonempty support")
        sizes = {p.n for p in support}
        if len(sizes) != 1 or (n is not None and sizes != {n}):
            raise ShuffleValidationError(f"Permutations of mixed sizes {sorted(sizes)}")
        if any(q < 0 for q in support.values()):
            raise ShuffleValidationError("Negative probability in distribution")
        total = sum(support.values())
        if isinstance(total, Fraction) and total != 1:
            raise ShuffleValidationError(f"Probabilities sum to {total}, not 1")
        self._support = support
        self._n = sizes.pop()

    @classmethod
    def uniform(cls, n):
        perms = all_permutations(n)
        return cls({p: Fraction(1, len(perms)) for p in perms})

    @classmethod
    def point_mass(cls, pi: Permutation):
        return cls({pi: Fraction(1)})

    @property
    def n(self):
        return self._n

    @property
    def support(self):
        return dict(self._support)

    def probability(self, pi):
        return self._support.get(pi, Fraction(0))

    def __eq__(self, other):
        return isinstance(other, ExactDistribution) and self._support == other._support

    def __repr__(self):
        return f"ExactDistribution(n={self._n}, support={len(self._support)})"

    def to_json(self):
        return {str(p): q for p, q in sorted(self._support.items())}


def _as_distribution(d):
    return d if isinstance(d, ExactDistribution) else ExactDistribution(d)


def separation_distance(d):
    """max over pi of 1 - n! d(pi); permutations outside the support count with d(pi) = 0."""
    d = _as_distribution(d)
    size = math.factorial(d.n)
    if len(d.support) < size:
        return Fraction(1)
    return max(1 - size * q for q in d.support.values())


def total_variation(d):
    d = _as_distribution(d)
    size = math.factorial(d.n)
    u = Fraction(1, size)
    inside = sum(abs(q - u) for q in d.support.values())
    return (inside + (size - len(d.support)) * u) / 2


def _project(process, dist):
    out = collections.defaultdict(Fraction)
    for x, p in dist.items():
        out[process.project(x)] += p
    return ExactDistribution(dict(out))


def exact_distribution(spec: ProcessSpec, n, t) -> ExactDistribution:
    """Law of the deck after t steps from the canonical start, by state-space evolution."""
    spec = spec.with_n(n)
    check_exact_guard(spec)
    process = process_for(spec)
    dist = {process.canonical_start(): Fraction(1)}
    for _ in range(t):
        dist = evolve(process, dist)
    return _project(process, dist)


def distribution_by_paths(spec: ProcessSpec, n, t) -> ExactDistribution:
    """The same law, summed over every path of the jumbled view (gathers included)."""
    spec = spec.with_n(n)
    check_exact_guard(spec)
    out = collections.defaultdict(Fraction)
    for enumerated in enumerate_paths(spec, t):
        out[enumerated.end] += enumerated.probability
    return ExactDistribution(dict(out))


def distance_curve(spec: ProcessSpec, n, t_grid=DEFAULT_T_GRID):
    """Exact separation and total variation over a grid of t."""
    t_grid = sorted(set(int(t) for t in t_grid))
    spec = spec.with_n(n)
    check_exact_guard(spec)
    process = process_for(spec)
    dist = {process.canonical_start(): Fraction(1)}
    rows = []
    t = 0
    for target in t_grid:
        while t < target:
            dist = evolve(process, dist)
            t += 1
        law = _project(process, dist)
        rows.append({"t": t, "sep": separation_distance(law), "tv": total_variation(law)})
    return rows


def mixing_time(spec: ProcessSpec, n, eps, t_max=200):
    """Smallest t <= t_max with sep(t) <= eps, or None."""
    spec = spec.with_n(n)
    check_exact_guard(spec)
    process = process_for(spec)
    dist = {process.canonical_start(): Fraction(1)}
    for t in range(t_max + 1):
        if separation_distance(_project(process, dist)) <= eps:
            return t
        dist = evolve(process, dist)
    return None


class _Coverage(object):
    """Augmented stopping state for the all-pairs rule: the set of pairs seen, as a bitset."""

    def __init__(self, n):
        self.n = n
        self.bit = {}
        k = 0
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                self.bit[(i, j)] = 1 << k
                k += 1
        self.full = (1 << k) - 1
        self.start = 0

    def update(self, tag, events):
        for ev in events:
            tag |= self.bit[ev.pair.pair]
        return tag

    def done(self, tag):
        return tag == self.full


class _Windows(object):
    """Augmented stopping state for the sequential rule: (current card, partners in its window)."""

    def __init__(self, n):
        self.n = n
        self.start = self._close((1, 0))

    def _close(self, tag):
        card, seen = tag
        while card <= self.n and seen == self._needed(card):
            card, seen = card + 1, 0
        return card, seen

    def _needed(self, card):
        return ((1 << self.n) - 1) & ~(1 << (card - 1))

    def update(self, tag, events):
        card, seen = tag
        if card > self.n:
            return tag
        for ev in events:
            if card in ev.pair.pair:
                other = ev.pair.j if ev.pair.i == card else ev.pair.i
                seen |= 1 << (other - 1)
        if seen == self._needed(card):
            # the next window opens strictly after this step
            return self._close((card + 1, 0))
        return card, seen

    def done(self, tag):
        return tag[0] > self.n


@dataclass
class MutationBoundReport:
    rule: str
    rows: List[dict] = field(default_factory=list)

    @property
    def holds(self):
        return all(row["holds"] for row in self.rows)

    def to_frame(self):
        return pd.DataFrame(self.rows, columns=["t", "sep", "tv", "p_T_gt_t", "holds"])

    def to_json(self):
        return {"rule": self.rule, "holds": self.holds, "rows": self.rows}


def verify_mutation_bound(spec: ProcessSpec, n, t_grid=DEFAULT_T_GRID, rule=ALL_PAIRS) -> MutationBoundReport:
    """Exact sep(t) against exact P(T > t) for the all-pairs or the sequential rule.

    P(T > t) comes from evolving the chain on states augmented with the progress of the rule,
    so no path is enumerated.
    """
    rule = StoppingRule.of(rule)
    spec = spec.with_n(n)
    check_exact_guard(spec)
    process = process_for(spec)
    if not process.has_detector:
        raise ShuffleValidationError(f"{spec.family} has no interaction detector")
    tracker = _Coverage(n) if rule.kind == ALL_PAIRS else _Windows(n)
    dist = {(process.canonical_start(), tracker.start): Fraction(1)}
    report = MutationBoundReport(rule.kind)
    t_grid = sorted(set(int(t) for t in t_grid))
    t = 0
    for target in t_grid:
        while t < target:
            t += 1
            nxt = collections.defaultdict(Fraction)
            for (x, tag), p in dist.items():
                for tr in process.enumerate_transitions(x):
                    nxt[(tr.state, tracker.update(tag, tr.events))] += p * tr.probability
            dist = nxt
        law = collections.defaultdict(Fraction)
        tail = Fraction(0)
        for (x, tag), p in dist.items():
            law[process.project(x)] += p
            if not tracker.done(tag):
                tail += p
        law = ExactDistribution(dict(law))
        sep = separation_distance(law)
        report.rows.append(
            {"t": t, "sep": sep, "tv": total_variation(law), "p_T_gt_t": tail, "holds": sep <= tail}
        )
    logger.info(f"Mutation bound for {spec!r} under {rule}: holds={report.holds}")
    return report
