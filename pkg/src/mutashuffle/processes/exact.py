"""Exact small-n checks on shuffling processes, in rational arithmetic."""
import collections
import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional

from ..errors import GuardExceededError
from ..perm import Permutation, Transposition, all_permutations, compose
from .base import (
    ADJ_TRANSPOSITION,
    CYCLE_TRANSPOSITION,
    ProcessSpec,
    RANDOM_TO_RANDOM,
    RANDOM_TO_TOP,
    ShufflingProcess,
    WASH1D,
    WASH1D_LONG,
    WASH_GRID,
)
from .paths import process_for
from .wash import sorted_piles

logger = logging.getLogger(__name__)

EXACT_LIMITS = {
    WASH1D: 4,
    WASH_GRID: 4,
    WASH1D_LONG: 3,
    ADJ_TRANSPOSITION: 5,
    CYCLE_TRANSPOSITION: 5,
    RANDOM_TO_RANDOM: 5,
    RANDOM_TO_TOP: 5,
}
MAX_GRID_SITES = 16
DEFAULT_STATE_LIMIT = 200_000


def check_exact_guard(spec: ProcessSpec):
    limit = EXACT_LIMITS.get(spec.family)
    if limit is not None and spec.n > limit:
        raise GuardExceededError(
            f"Exact analysis of {spec.family} is limited to n <= {limit}, got n={spec.n}"
        )
    if spec.family == WASH_GRID and spec.n**spec.d > MAX_GRID_SITES:
        raise GuardExceededError(
            f"Exact analysis of wash-grid is limited to {MAX_GRID_SITES} vertices"
        )


def _as_process(spec_or_process, n_small=None, view=False):
    if isinstance(spec_or_process, ShufflingProcess):
        return spec_or_process.view() if view else spec_or_process
    spec = spec_or_process if n_small is None else spec_or_process.with_n(n_small)
    check_exact_guard(spec)
    return process_for(spec, view)


def reachable_states(process: ShufflingProcess, start=None, limit=DEFAULT_STATE_LIMIT):
    """Breadth-first search over positive-probability transitions, in discovery order."""
    start = process.canonical_start() if start is None else start
    seen = {start: None}
    queue = collections.deque([start])
    while queue:
        x = queue.popleft()
        for tr in process.enumerate_transitions(x):
            if tr.state not in seen:
                seen[tr.state] = None
                if len(seen) > limit:
                    raise GuardExceededError(f"More than {limit} reachable states")
                queue.append(tr.state)
    return list(seen)


def evolve(process: ShufflingProcess, dist: Dict[Any, Fraction]):
    """Pushes an exact distribution over states through one step."""
    out = {}
    for x, px in dist.items():
        for y, pxy in process.step_distribution(x).items():
            out[y] = out.get(y, 0) + px * pxy
    return out


@dataclass
class FairnessReport:
    fair: bool
    states_checked: int
    group_elements: int
    witness: Optional[dict] = None

    def to_json(self):
        return {
            "fair": self.fair,
            "states_checked": self.states_checked,
            "group_elements": self.group_elements,
            "witness": self.witness,
        }


def check_fair(spec, n_small=None):
    """Checks that stepping commutes with the label action on every reachable state.

    Parameters
    ----------
    spec : ProcessSpec or ShufflingProcess
        The process to check. A process instance is used as is, which lets tests pass
        deliberately broken chains.
    n_small : int, optional
        Deck size to check at, overriding the spec's.

    Returns
    -------
    FairnessReport
        ``fair`` is False with a witness (state, g and both distributions) on the first
        violation found.
    """
    process = _as_process(spec, n_small)
    states = reachable_states(process)
    group = all_permutations(process.n)
    logger.info(f"Checking fairness of {process!r} on {len(states)} states")
    for x in states:
        base = process.step_distribution(x)
        for g in group:
            moved = {process.relabel_state(y, g): p for y, p in base.items()}
            direct = process.step_distribution(process.relabel_state(x, g))
            if moved != direct:
                witness = {
                    "state": x,
                    "g": g,
                    "relabeled_step": sorted(moved.items(), key=repr),
                    "step_from_relabeled": sorted(direct.items(), key=repr),
                }
                return FairnessReport(False, len(states), len(group), witness)
    return FairnessReport(True, len(states), len(group))


@dataclass
class InteractionCheck:
    """Outcome of comparing a transition with its pair-relabeled twin.

    `clause` is "fixed" when the successor is fixed by the swap, "equal" when the two
    probabilities match otherwise, and None when they differ.
    """

    holds: bool
    clause: Optional[str]
    probability: Fraction
    twin_probability: Fraction

    def __bool__(self):
        return self.holds


def _normalize(process, state):
    if process.jumbled:
        return sorted_piles(state)
    return state


def check_interaction_pair(spec, x, y, i, j, record=None) -> InteractionCheck:
    """Compares M(x, y) with M(x, y.(i j)).

    Wash families are checked on their jumbled view. With `record`, the refined check is
    run instead: the record and its twin must have equal probability and the twin must lead
    to y.(i j).
    """
    process = _as_process(spec, view=True)
    x, y = _normalize(process, x), _normalize(process, y)
    pair = Transposition(i, j)
    y_twin = process.relabel_state(y, pair.as_permutation(process.n))
    if record is not None:
        prob = process.record_probability(x, record)
        twin = process.twin_record(x, record, pair)
        twin_prob = process.record_probability(x, twin)
        landed, _ = process.replay_step(x, twin)
        ok = landed == y_twin and prob == twin_prob
        clause = ("fixed" if y_twin == y else "equal") if ok else None
        return InteractionCheck(ok, clause, prob, twin_prob)
    dist = process.step_distribution(x)
    prob = dist.get(y, Fraction(0))
    twin_prob = dist.get(y_twin, Fraction(0))
    if y_twin == y:
        return InteractionCheck(True, "fixed", prob, twin_prob)
    ok = prob == twin_prob
    return InteractionCheck(ok, "equal" if ok else None, prob, twin_prob)


@dataclass
class SoundnessReport:
    events_checked: int = 0
    clauses: Dict[str, int] = field(default_factory=dict)
    violations: List[dict] = field(default_factory=list)

    @property
    def sound(self):
        return not self.violations

    def to_json(self):
        return {
            "events_checked": self.events_checked,
            "clauses": dict(self.clauses),
            "violations": self.violations,
            "sound": self.sound,
        }


def check_event_soundness(spec, n_small=None, max_states=None):
    """Validates every emitted event through its twin record.

    Walks the reachable states of the path view (all of them, or the first `max_states` in
    breadth-first order) and checks each event of each transition with
    `check_interaction_pair` in its refined form.
    """
    process = _as_process(spec, n_small, view=True)
    states = reachable_states(process)
    if max_states is not None:
        states = states[:max_states]
    report = SoundnessReport()
    clauses = collections.Counter()
    for x in states:
        for tr in process.enumerate_transitions(x):
            for ev in tr.events:
                report.events_checked += 1
                try:
                    result = check_interaction_pair(process, x, tr.state, ev.pair.i, ev.pair.j, tr.record)
                except ValueError as err:
                    result = None
                    reason = str(err)
                else:
                    reason = "unequal twin probability"
                if result:
                    clauses[result.clause] += 1
                else:
                    report.violations.append(
                        {"state": x, "record": tr.record, "event": ev, "reason": reason}
                    )
    report.clauses = dict(clauses)
    logger.info(
        f"Checked {report.events_checked} events of {process!r}: {len(report.violations)} violations"
    )
    return report


def _pile_of(state, label):
    for pile in state:
        if label in pile:
            return pile
    return None


def check_jumbled(distribution, labels, tol=0):
    """True iff relabeling the cards of `labels` among themselves leaves the distribution unchanged.

    For wash states (tuples of piles) the check is made on the states where all of `labels`
    share one pile, i.e. it asks whether that pile's order is uniform and independent of the
    rest of the state. Permutation-valued distributions are checked unconditionally.
    """
    labels = sorted(set(labels))
    if len(labels) < 2:
        return True
    n = max(_state_size(s) for s in distribution)
    group = []
    for perm in itertools.permutations(labels):
        g = list(range(1, n + 1))
        for src, dst in zip(labels, perm):
            g[src - 1] = dst
        group.append(Permutation(g))
    for state, prob in distribution.items():
        if not isinstance(state, Permutation):
            pile = _pile_of(state, labels[0])
            if pile is None or not set(labels) <= set(pile):
                continue
        for g in group:
            other = distribution.get(_relabel(state, g), Fraction(0))
            if abs(other - prob) > tol:
                return False
    return True


def check_piles_jumbled(distribution):
    """Every pile of every supported wash state is jumbled."""
    piles = {tuple(sorted(p)) for state in distribution for p in state if len(p) > 1}
    return all(check_jumbled(distribution, pile) for pile in piles)


def _state_size(state):
    if isinstance(state, Permutation):
        return state.n
    return sum(len(p) for p in state)


def _relabel(state, g):
    if isinstance(state, Permutation):
        return compose(g, state)
    return tuple(tuple(g(c) for c in pile) for pile in state)
