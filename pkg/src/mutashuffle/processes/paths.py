import functools
import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any, List, NamedTuple, Tuple

from ..errors import InfeasibleRecordError, ShuffleValidationError
from ..perm import Permutation
from .base import InteractionEvent, ProcessSpec

logger = logging.getLogger(__name__)


@functools.lru_cache(maxsize=None)
def process_for(spec: ProcessSpec, view=False):
    """Shared process instance per spec, so transition caches are reused across calls."""
    from . import build_process

    process = build_process(spec)
    return process.view() if view else process


@dataclass(frozen=True)
class Path:
    """Initial state plus step records; `view` paths live on the jumbled view and end in a gather."""

    spec: ProcessSpec
    initial: Any
    steps: Tuple[Any, ...] = ()
    gather: Any = None
    view: bool = False

    @property
    def process(self):
        return process_for(self.spec, self.view)

    def __len__(self):
        return len(self.steps)

    def with_steps(self, steps, gather=None):
        return replace(self, steps=tuple(steps), gather=gather)

    def to_json(self):
        return {
            "spec": self.spec.to_dict(),
            "initial": self.initial,
            "steps": list(self.steps),
            "gather": self.gather,
            "view": self.view,
        }


class PathReplay(NamedTuple):
    states: List[Any]
    events: List[Tuple[InteractionEvent, ...]]
    end: Permutation
    probability: Fraction


def replay(path: Path) -> PathReplay:
    """States x_0..x_t, the events of every step, the projected end and the exact probability."""
    process = path.process
    states = [path.initial]
    events = []
    prob = Fraction(1)
    for t, record in enumerate(path.steps, start=1):
        x = states[-1]
        prob *= process.record_probability(x, record)
        nxt, evs = process.replay_step(x, record, time=t)
        states.append(nxt)
        events.append(tuple(evs))
    last = states[-1]
    if path.view and process.jumbled:
        if path.gather is None:
            raise InfeasibleRecordError("record impossible in state: missing gather record")
        end = process.apply_gather(last, path.gather)
        prob *= process.gather_probability(last, path.gather)
    else:
        end = process.project(last)
    return PathReplay(states, events, end, prob)


def flat_events(replayed: PathReplay):
    return [e for step in replayed.events for e in step]


def simulate(spec: ProcessSpec, steps, rng, start=None, view=False):
    """Samples a path of `steps` records; view paths also draw a uniform gather."""
    process = process_for(spec, view)
    state = process.canonical_start() if start is None else start
    initial = state
    records = []
    for t in range(1, steps + 1):
        record, state, _ = process.sample_step(state, rng, time=t)
        records.append(record)
    gather = None
    if view and process.jumbled:
        gather = tuple(tuple(pile[k] for k in rng.permutation(len(pile))) for pile in state)
    return Path(spec, initial, tuple(records), gather, view)


class EnumeratedPath(NamedTuple):
    path: Path
    probability: Fraction
    end: Permutation
    events: Tuple[Tuple[InteractionEvent, ...], ...]


def enumerate_paths(spec: ProcessSpec, t, view=True, start=None):
    """Every positive-probability path of length t, depth first, with its gathers.

    Paths are built on the jumbled view by default; probabilities are exact.
    """
    process = process_for(spec, view)
    x0 = process.canonical_start() if start is None else start

    def walk(state, depth, records, prob, events):
        if depth == t:
            for gather, end, gprob in process.gather_options(state):
                yield EnumeratedPath(
                    Path(spec, x0, tuple(records), gather if process.jumbled else None, view),
                    prob * gprob,
                    end,
                    tuple(events),
                )
            return
        for tr in process.enumerate_transitions(state, time=depth + 1):
            records.append(tr.record)
            events.append(tr.events)
            yield from walk(tr.state, depth + 1, records, prob * tr.probability, events)
            records.pop()
            events.pop()

    if t < 0:
        raise ShuffleValidationError(f"Path length must be nonnegative, got {t}")
    yield from walk(x0, 0, [], Fraction(1), [])
