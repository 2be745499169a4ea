"""Path relabeling and the two path-mutation maps.

A relabel at step t by the pair (i j) replaces step t with its twin record (the step that
lands on the pair-relabeled state with equal probability) and renames i and j in every later
step and in the gather. The end permutation changes from pi to (i j).pi, the label action.

Relabels are always applied at non-increasing times, so every new one multiplies the end on
the left and the residual of the fast map is multiplied on the right.
"""
import logging
from dataclasses import dataclass, field
from typing import List

from ..errors import ContractViolation, RuleUnsatisfiedError, ShuffleValidationError
from ..perm import Permutation, Transposition, compose, invert, length_decreases, star_factor
from ..processes.paths import Path, flat_events, replay
from ..stopping import all_pairs_time, sequential_times

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class RelabelAction:
    """Exchange the labels of `pair` from step `time` on (step `time` itself is twinned).

    ``time == 0`` relabels the whole path and needs the initial state to be fixed by the pair.
    """

    time: int
    pair: Transposition

    def to_json(self):
        return {"time": self.time, "pair": self.pair.to_json()}


@dataclass
class MutationPlan:
    actions: List[RelabelAction] = field(default_factory=list)
    source_end: Permutation = None
    target_end: Permutation = None

    def to_json(self):
        return {
            "actions": [a.to_json() for a in self.actions],
            "source_end": self.source_end,
            "target_end": self.target_end,
        }


def _check_mutable(path: Path):
    process = path.process
    if process.view() is not process:
        raise ShuffleValidationError("Mutation maps run on paths of the jumbled view (view=True)")
    if not process.has_detector or not process.relabel_equivariant:
        raise ShuffleValidationError(
            f"{path.spec.family} events are not carried along by relabeling; "
            f"mutation maps are unavailable for this family"
        )
    return process


def relabel_suffix(path: Path, action: RelabelAction) -> Path:
    """Twin step `action.time` for the pair and rename the pair's cards in everything after it.

    Raises
    ------
    ShuffleValidationError
        When the time is out of range, or when the step has no twin for the pair (the pair did
        not interact there and the successor is not fixed by the swap).
    """
    process = path.process
    t = action.time
    if not 0 <= t <= len(path):
        raise ShuffleValidationError(f"Relabel time {t} outside a path of length {len(path)}")
    g = action.pair.as_permutation(process.n)
    steps = list(path.steps)
    if t == 0:
        if process.relabel_state(path.initial, g) != path.initial:
            raise ShuffleValidationError(f"The initial state is not fixed by {action.pair}")
    else:
        state = path.initial
        for record in steps[: t - 1]:
            state, _ = process.replay_step(state, record)
        steps[t - 1] = process.twin_record(state, steps[t - 1], action.pair)
    for k in range(t, len(steps)):
        steps[k] = process.relabel_record(steps[k], g)
    gather = path.gather if path.gather is None else process.relabel_gather(path.gather, g)
    return path.with_steps(steps, gather)


def apply_plan(path: Path, plan: MutationPlan) -> Path:
    """Apply the plan's relabels in order; the result must end at the plan's target."""
    current = path
    for action in plan.actions:
        current = relabel_suffix(current, action)
    end = replay(current).end
    if end != plan.target_end:
        raise ContractViolation(f"Mutated path ends at {end}, expected {plan.target_end}")
    return current


def last_interactions(events_by_step):
    """(time, pair) of the last interaction of every pair, latest first.

    Simultaneous events are taken in reverse lexicographic pair order.
    """
    seen = set()
    out = []
    for t in range(len(events_by_step), 0, -1):
        for pair in sorted({ev.pair for ev in events_by_step[t - 1]}, reverse=True):
            if pair not in seen:
                seen.add(pair)
                out.append((t, pair))
    return out


def plan_fast(path: Path, target: Permutation) -> MutationPlan:
    _check_mutable(path)
    replayed = replay(path)
    n = path.process.n
    if not all_pairs_time(flat_events(replayed), n).achieved:
        raise RuleUnsatisfiedError("all-pairs rule unsatisfied")
    residual = compose(target, invert(replayed.end))
    actions = []
    for t, pair in last_interactions(replayed.events):
        if length_decreases(residual, pair):
            actions.append(RelabelAction(t, pair))
            residual = compose(residual, pair.as_permutation(n))
    if not residual.is_identity():
        raise ContractViolation(f"Residual {residual} left after the backward scan")
    return MutationPlan(actions, replayed.end, target)


def mutate_fast(path: Path, target: Permutation) -> Path:
    """Map a path satisfying the all-pairs rule to an equally likely path ending at `target`.

    The last interactions of all pairs are scanned from the end of the path backwards; a
    pair is relabeled at its last interaction whenever that shortens the remaining residual
    ``target . end^-1``.
    """
    return apply_plan(path, plan_fast(path, target))


def mutate_fast_inverse(path: Path, source_end: Permutation, target: Permutation) -> Path:
    """Recover the path that `mutate_fast` sent to `path`.

    The backward scan is repeated on the mutated path: at each step the original events are
    the mutated ones renamed by the inverse of the residual. The relabels found are then undone
    earliest first.

    Raises
    ------
    RuleUnsatisfiedError
        "not in image" when `path` is not the image of a path ending at `source_end`.
    """
    process = _check_mutable(path)
    n = process.n
    replayed = replay(path)
    if replayed.end != target:
        raise RuleUnsatisfiedError(f"not in image: path ends at {replayed.end}, not {target}")
    residual = compose(target, invert(source_end))
    seen = set()
    actions = []
    for t in range(len(path), 0, -1):
        back = invert(residual)
        original = {pair.conjugate(back) for pair in {ev.pair for ev in replayed.events[t - 1]}}
        for pair in sorted(original, reverse=True):
            if pair in seen:
                continue
            seen.add(pair)
            if length_decreases(residual, pair):
                actions.append(RelabelAction(t, pair))
                residual = compose(residual, pair.as_permutation(n))
    if len(seen) < n * (n - 1) // 2 or not residual.is_identity():
        raise RuleUnsatisfiedError("not in image: reconstruction does not cover all pairs")
    current = path
    try:
        for action in reversed(actions):
            current = relabel_suffix(current, action)
    except ShuffleValidationError as err:
        raise RuleUnsatisfiedError(f"not in image: {err}") from err
    recovered = replay(current)
    if recovered.end != source_end or not all_pairs_time(flat_events(recovered), n).achieved:
        raise RuleUnsatisfiedError("not in image")
    if mutate_fast(current, target) != path:
        raise RuleUnsatisfiedError("not in image: the recovered path maps elsewhere")
    return current


def _window_event(events_by_step, card, other, after, until=None):
    pair = Transposition(card, other)
    last = len(events_by_step) if until is None else until
    for t in range(after + 1, last + 1):
        if any(ev.pair == pair for ev in events_by_step[t - 1]):
            return t
    return None


def plan_slow(path: Path, target: Permutation) -> MutationPlan:
    _check_mutable(path)
    replayed = replay(path)
    n = path.process.n
    report = sequential_times(flat_events(replayed), n)
    if not report.achieved:
        raise RuleUnsatisfiedError("sequential rule unsatisfied")
    windows = report.sequential_times
    star = star_factor(compose(target, invert(replayed.end)))
    actions = []
    for i in range(n, 0, -1):
        a_i = star.a[i - 1]
        if a_i == i:
            continue
        t = _window_event(replayed.events, i, a_i, windows[i - 1], windows[i])
        if t is None:
            raise ContractViolation(f"Cards {i} and {a_i} did not meet in window {i}")
        actions.append(RelabelAction(t, Transposition(a_i, i)))
    return MutationPlan(actions, replayed.end, target)


def mutate_slow(path: Path, target: Permutation) -> Path:
    """Map a path satisfying the sequential rule to an equally likely path ending at `target`.

    With ``target . end^-1 = (1 a_1)(2 a_2)...(n a_n)``, cards i and a_i are relabeled at their
    first meeting inside card i's window, for i = n down to 1.
    """
    return apply_plan(path, plan_slow(path, target))


def mutate_slow_inverse(path: Path, source_end: Permutation, target: Permutation) -> Path:
    """Undo `mutate_slow`: for i = 1..n wait until i meets a_i after T_{i-1} and swap back."""
    process = _check_mutable(path)
    n = process.n
    if replay(path).end != target:
        raise RuleUnsatisfiedError("not in image: wrong end permutation")
    star = star_factor(compose(target, invert(source_end)))
    current = path
    start = 0
    for i in range(1, n + 1):
        a_i = star.a[i - 1]
        if a_i != i:
            events = replay(current).events
            t = _window_event(events, i, a_i, start)
            if t is None:
                raise RuleUnsatisfiedError(f"not in image: cards {i} and {a_i} never meet after {start}")
            try:
                current = relabel_suffix(current, RelabelAction(t, Transposition(a_i, i)))
            except ShuffleValidationError as err:
                raise RuleUnsatisfiedError(f"not in image: {err}") from err
        times = sequential_times(flat_events(replay(current)), n).sequential_times
        if times[i] is None:
            raise RuleUnsatisfiedError(f"not in image: window {i} never closes")
        start = times[i]
    if replay(current).end != source_end or mutate_slow(current, target) != path:
        raise RuleUnsatisfiedError("not in image")
    return current
