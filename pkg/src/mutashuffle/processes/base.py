import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, List, NamedTuple, Optional, Tuple

from ..errors import GuardExceededError, InfeasibleRecordError, ShuffleValidationError
from ..perm import Permutation, Transposition, compose
from ..utils.json_utils import parse_fraction

logger = logging.getLogger(__name__)

WASH1D = "wash1d"
WASH1D_LONG = "wash1d-long"
WASH_GRID = "wash-grid"
ADJ_TRANSPOSITION = "adj-transposition"
CYCLE_TRANSPOSITION = "cycle-transposition"
RANDOM_TO_RANDOM = "random-to-random"
RANDOM_TO_TOP = "random-to-top"

FAMILIES = (
    WASH1D,
    WASH1D_LONG,
    WASH_GRID,
    ADJ_TRANSPOSITION,
    CYCLE_TRANSPOSITION,
    RANDOM_TO_RANDOM,
    RANDOM_TO_TOP,
)

DEFAULT_WASH_LONG_P = Fraction(1, 2)
DEFAULT_GRID_DIMENSION = 1
DEFAULT_MERGE = "gsr"
MERGE_VARIANTS = ("gsr", "insertion")

MIN_DECK = {
    ADJ_TRANSPOSITION: 2,
    CYCLE_TRANSPOSITION: 3,
}

SAME_PILE = "same-pile"
OVERTAKE = "overtake"
ADJACENT_PAIR = "adjacent-pair-chosen"
TOP_TWO = "top-two"
INSERTED_ABOVE = "inserted-above"

RIGHT_SWEEP = "right"
LEFT_SWEEP = "left"


class ProcessSpec(object):
    """Family, deck size and family parameters of a shuffling process.

    Parameters
    ----------
    family : str
        One of `FAMILIES`.
    n : int
        Number of cards.
    p : float, str or Fraction, optional
        Geometric parameter of wash1d-long. Stored exactly; floats go through their decimal
        representation. Defaults to `DEFAULT_WASH_LONG_P`.
    d : int, optional
        Grid dimension of wash-grid. Defaults to `DEFAULT_GRID_DIMENSION`.
    merge : str, optional
        Pile merge rule of wash1d-long, "gsr" or "insertion". Defaults to `DEFAULT_MERGE`.
    """

    def __init__(self, family, n, p=None, d=None, merge=None):
        if family not in FAMILIES:
            raise ShuffleValidationError(f"Unknown family {family}")
        n = int(n)
        if n < max(1, MIN_DECK.get(family, 1)):
            raise ShuffleValidationError(
                f"{family} needs at least {max(1, MIN_DECK.get(family, 1))} cards, got {n}"
            )
        params = {}
        if family == WASH1D_LONG:
            p = DEFAULT_WASH_LONG_P if p is None else parse_fraction(p)
            if not 0 < p < 1:
                raise ShuffleValidationError(f"wash1d-long requires 0 < p < 1, got {p}")
            merge = DEFAULT_MERGE if merge is None else merge
            if merge not in MERGE_VARIANTS:
                raise ShuffleValidationError(f"Unknown merge rule {merge}")
            params["p"] = p
            params["merge"] = merge
        elif family == WASH_GRID:
            d = DEFAULT_GRID_DIMENSION if d is None else int(d)
            if d < 1:
                raise ShuffleValidationError(f"wash-grid requires dimension d >= 1, got {d}")
            params["d"] = d
        unused = [k for k, v in dict(p=p, d=d, merge=merge).items() if v is not None and k not in params]
        if unused:
            raise ShuffleValidationError(f"Parameters {unused} do not apply to {family}")
        self._config = dict(family=family, n=n, params=params)

    @property
    def family(self):
        return self._config.get("family")

    @property
    def n(self):
        return self._config.get("n")

    @property
    def params(self):
        return dict(self._config.get("params"))

    @property
    def p(self):
        return self._config["params"].get("p", None)

    @property
    def d(self):
        return self._config["params"].get("d", None)

    @property
    def merge(self):
        return self._config["params"].get("merge", None)

    def with_n(self, n):
        return ProcessSpec(self.family, n, **self.params)

    def to_dict(self):
        return {"family": self.family, "n": self.n, "params": self.params}

    def to_json(self):
        return self.to_dict()

    @classmethod
    def from_dict(cls, d):
        if "family" not in d or "n" not in d:
            raise ShuffleValidationError("A process needs both 'family' and 'n'")
        return cls(d["family"], d["n"], **dict(d.get("params") or {}))

    def _key(self):
        return (self.family, self.n, tuple(sorted(self._config["params"].items())))

    def __eq__(self, other):
        return isinstance(other, ProcessSpec) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        extra = "".join(f", {k}={v}" for k, v in sorted(self._config["params"].items()))
        return f"ProcessSpec({self.family}, n={self.n}{extra})"


@dataclass(frozen=True, order=True)
class InteractionEvent:
    """Cards `pair` interacted during step `time` (1-based)."""

    time: int
    pair: Transposition
    kind: str = field(compare=False)
    phase: Optional[str] = field(default=None, compare=False)

    def to_json(self):
        out = {"t": self.time, "pair": self.pair.to_json(), "kind": self.kind}
        if self.phase is not None:
            out["phase"] = self.phase
        return out


class Transition(NamedTuple):
    record: Any
    state: Any
    probability: Fraction
    events: Tuple[InteractionEvent, ...]


def ordered_events(pairs, kind, time, phase=None):
    """Events for simultaneous pairs, in lexicographic pair order."""
    return [InteractionEvent(time, t, kind, phase) for t in sorted(set(pairs))]


class ShufflingProcess(ABC):
    """A Markov chain on a family-specific state space with a projection to S_n.

    Steps are driven by explicit records: `replay_step` is deterministic in the record, so
    a path (initial state plus records) can be replayed, enumerated and relabeled.
    """

    has_detector = True
    relabel_equivariant = False
    jumbled = False
    max_enumeration_n = None

    def __init__(self, spec: ProcessSpec):
        self._spec = spec
        self._transition_cache = {}

    @property
    def spec(self):
        return self._spec

    @property
    def n(self):
        return self._spec.n

    @property
    def family(self):
        return self._spec.family

    @abstractmethod
    def canonical_start(self):
        pass

    @abstractmethod
    def sample_record(self, state, rng):
        pass

    @abstractmethod
    def replay_step(self, state, record, time=1):
        """Returns (next state, events). Raises InfeasibleRecordError for impossible records."""
        pass

    @abstractmethod
    def _transitions(self, state):
        """Yields (record, probability) for every positive-probability record."""
        pass

    @abstractmethod
    def project(self, state) -> Permutation:
        pass

    @abstractmethod
    def relabel_state(self, state, g: Permutation):
        pass

    def sample_step(self, state, rng, time=1):
        record = self.sample_record(state, rng)
        nxt, events = self.replay_step(state, record, time=time)
        return record, nxt, events

    def enumerate_transitions(self, state, time=1) -> List[Transition]:
        if self.max_enumeration_n is not None and self.n > self.max_enumeration_n:
            raise GuardExceededError(
                f"{self.family} transitions are enumerable only for n <= {self.max_enumeration_n}"
            )
        key = (state, time)
        if key not in self._transition_cache:
            out = []
            for record, prob in self._transitions(state):
                nxt, events = self.replay_step(state, record, time=time)
                out.append(Transition(record, nxt, prob, tuple(events)))
            self._transition_cache[key] = out
        return self._transition_cache[key]

    def step_distribution(self, state):
        dist = {}
        for tr in self.enumerate_transitions(state):
            dist[tr.state] = dist.get(tr.state, 0) + tr.probability
        return dist

    def record_probability(self, state, record) -> Fraction:
        for tr in self.enumerate_transitions(state):
            if tr.record == record:
                return tr.probability
        raise InfeasibleRecordError(f"record impossible in state: {record!r}")

    def relabel_record(self, record, g: Permutation):
        """Record of the relabeled step; position-valued records are unchanged."""
        return record

    def twin_record(self, state, record, pair: Transposition):
        """Equal-probability record whose successor is the pair-relabeled successor."""
        nxt, _ = self.replay_step(state, record)
        if self.relabel_state(nxt, pair.as_permutation(self.n)) == nxt:
            return record
        raise ShuffleValidationError(f"No twin for {pair} at this step")

    def view(self):
        """The process on which paths are built and relabeled."""
        return self

    def gather_options(self, state):
        """(gather record, final permutation, probability) for every way to collect the deck."""
        return [(None, self.project(state), Fraction(1))]

    def apply_gather(self, state, gather):
        return self.project(state)

    def gather_probability(self, state, gather):
        return Fraction(1)

    def relabel_gather(self, gather, g):
        return gather

    def __repr__(self):
        return f"{type(self).__name__}({self._spec!r})"


class WalkProcess(ShufflingProcess):
    """Random walks on S_n: the state is the deck itself."""

    relabel_equivariant = True

    def canonical_start(self):
        return Permutation.identity(self.n)

    def project(self, state):
        return state

    def relabel_state(self, state, g):
        return compose(g, state)

    def _check_state(self, state):
        if not isinstance(state, Permutation) or state.n != self.n:
            raise ShuffleValidationError(f"Expected a deck of {self.n} cards, got {state!r}")
