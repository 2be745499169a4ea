import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from ..errors import ShuffleValidationError
from ..perm import Transposition, all_transpositions
from .matrix import as_trace

logger = logging.getLogger(__name__)

ALL_PAIRS = "all-pairs"
SEQUENTIAL = "sequential"
RULE_KINDS = (ALL_PAIRS, SEQUENTIAL)


@dataclass(frozen=True)
class StoppingRule:
    kind: str = ALL_PAIRS

    def __post_init__(self):
        if self.kind not in RULE_KINDS:
            raise ShuffleValidationError(
                f"Unknown stopping rule {self.kind}. Must be one of {', '.join(RULE_KINDS)}"
            )

    @classmethod
    def of(cls, rule):
        return rule if isinstance(rule, StoppingRule) else cls(rule)

    def evaluate(self, trace, n):
        if self.kind == ALL_PAIRS:
            return all_pairs_time(trace, n)
        return sequential_times(trace, n)

    def __str__(self):
        return self.kind


@dataclass
class StoppingReport:
    kind: str
    achieved: bool
    time: Optional[int] = None
    sequential_times: Optional[List[Optional[int]]] = None

    def __post_init__(self):
        if self.achieved != (self.time is not None):
            raise ShuffleValidationError("A stopping report has a time iff it was achieved")

    def to_json(self):
        out = {"kind": self.kind, "achieved": self.achieved, "time": self.time}
        if self.sequential_times is not None:
            out["sequential_times"] = list(self.sequential_times)
        return out


def first_interaction_times(trace, n) -> Dict[Transposition, int]:
    """Earliest event time of every pair that appears in the trace."""
    first = {}
    for ev in as_trace(trace):
        if ev.pair.j > n:
            raise ShuffleValidationError(f"Event {ev.pair} outside a deck of {n} cards")
        if ev.pair not in first or ev.time < first[ev.pair]:
            first[ev.pair] = ev.time
    return first


def all_pairs_time(trace, n) -> StoppingReport:
    """Earliest t at which every unordered pair has interacted at least once."""
    first = first_interaction_times(trace, n)
    pairs = all_transpositions(n)
    if any(p not in first for p in pairs):
        return StoppingReport(ALL_PAIRS, False)
    return StoppingReport(ALL_PAIRS, True, max((first[p] for p in pairs), default=0))


def window_end(trace, n, card, start):
    """Earliest T such that `card` has an event with every other card in (start, T], or None."""
    needed = set(range(1, n + 1)) - {card}
    if not needed:
        return start
    for ev in sorted(as_trace(trace)):
        if ev.time <= start or card not in ev.pair.pair:
            continue
        needed.discard(ev.pair.j if ev.pair.i == card else ev.pair.i)
        if not needed:
            return ev.time
    return None


def sequential_times(trace, n) -> StoppingReport:
    """T_0 = 0 and T_i the end of card i's window, windows taken in label order 1..n.

    Windows are half-open: an event at exactly T_{i-1} belongs to the previous window.
    Unachieved entries (and all after them) are None.
    """
    trace = sorted(as_trace(trace))
    times = [0]
    for card in range(1, n + 1):
        end = window_end(trace, n, card, times[-1])
        if end is None:
            times.extend([None] * (n + 1 - len(times)))
            break
        times.append(end)
    achieved = times[-1] is not None
    return StoppingReport(SEQUENTIAL, achieved, times[-1] if achieved else None, times)


def stopping_time(trace, n, rule=ALL_PAIRS) -> StoppingReport:
    return StoppingRule.of(rule).evaluate(trace, n)
