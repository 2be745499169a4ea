"""Random walks on S_n used as classical comparison shuffles."""
from fractions import Fraction

from ..errors import InfeasibleRecordError, ShuffleValidationError
from ..perm import Permutation, Transposition
from .base import (
    ADJACENT_PAIR,
    INSERTED_ABOVE,
    TOP_TWO,
    WalkProcess,
    ordered_events,
)

GEN_ID = "id"
GEN_CYCLE = "cycle"
GEN_SWAP = "swap"
CYCLE_GENERATORS = (GEN_ID, GEN_CYCLE, GEN_SWAP)


class AdjacentTransposition(WalkProcess):
    """Lazy adjacent transposition walk.

    A record ``(k, swap)`` picks the position pair (k, k+1) uniformly among the n-1 pairs,
    then swaps it when the coin `swap` is 1.
    """

    def sample_record(self, state, rng):
        k = int(rng.integers(1, self.n))
        return (k, int(rng.integers(0, 2)))

    def _transitions(self, state):
        prob = Fraction(1, 2 * (self.n - 1))
        for k in range(1, self.n):
            for swap in (0, 1):
                yield (k, swap), prob

    def replay_step(self, state, record, time=1):
        self._check_state(state)
        k, swap = record
        if not 1 <= k < self.n or swap not in (0, 1):
            raise InfeasibleRecordError(f"record impossible in state: {record!r}")
        deck = list(state.map)
        events = ordered_events([Transposition(deck[k - 1], deck[k])], ADJACENT_PAIR, time)
        if swap:
            deck[k - 1], deck[k] = deck[k], deck[k - 1]
        return Permutation(deck), events

    def twin_record(self, state, record, pair):
        k, swap = record
        if {state[k], state[k + 1]} != set(pair.pair):
            raise ShuffleValidationError(f"{pair} was not the chosen adjacent pair")
        return (k, 1 - swap)


class CycleTransposition(WalkProcess):
    """Each step applies id, the n-cycle or the top swap with probability 1/3.

    The n-cycle moves the card at position p to p+1 and the bottom card to the top.
    """

    def sample_record(self, state, rng):
        return CYCLE_GENERATORS[int(rng.integers(0, 3))]

    def _transitions(self, state):
        for gen in CYCLE_GENERATORS:
            yield gen, Fraction(1, 3)

    def replay_step(self, state, record, time=1):
        self._check_state(state)
        deck = list(state.map)
        events = []
        if record == GEN_CYCLE:
            deck = deck[-1:] + deck[:-1]
        elif record in (GEN_ID, GEN_SWAP):
            events = ordered_events([Transposition(deck[0], deck[1])], TOP_TWO, time)
            if record == GEN_SWAP:
                deck[0], deck[1] = deck[1], deck[0]
        else:
            raise InfeasibleRecordError(f"record impossible in state: {record!r}")
        return Permutation(deck), events

    def twin_record(self, state, record, pair):
        if record == GEN_CYCLE or {state[1], state[2]} != set(pair.pair):
            raise ShuffleValidationError(f"{pair} is not the top two cards of this step")
        return GEN_SWAP if record == GEN_ID else GEN_ID


class RandomToRandom(WalkProcess):
    """Remove card c and reinsert it so that it ends at position s, both uniform."""

    relabel_equivariant = False

    def sample_record(self, state, rng):
        return (int(rng.integers(1, self.n + 1)), int(rng.integers(1, self.n + 1)))

    def _transitions(self, state):
        prob = Fraction(1, self.n * self.n)
        for c in range(1, self.n + 1):
            for s in range(1, self.n + 1):
                yield (c, s), prob

    def replay_step(self, state, record, time=1):
        self._check_state(state)
        c, s = record
        if not (1 <= c <= self.n and 1 <= s <= self.n):
            raise InfeasibleRecordError(f"record impossible in state: {record!r}")
        deck = [x for x in state.map if x != c]
        deck.insert(s - 1, c)
        events = []
        if s < self.n:
            events = ordered_events([Transposition(c, deck[s])], INSERTED_ABOVE, time)
        return Permutation(deck), events

    def relabel_record(self, record, g):
        c, s = record
        return (g(c), s)

    def twin_record(self, state, record, pair):
        c, s = record
        if c not in pair.pair:
            raise ShuffleValidationError(f"{pair} does not contain the moved card {c}")
        partner = pair.apply(c)
        nxt, _ = self.replay_step(state, record)
        q = nxt.position_of(partner)
        if q == s + 1:
            return (c, s + 1)
        if q == s - 1:
            return (c, s - 1)
        raise ShuffleValidationError(f"{pair} is not adjacent after this step")


class RandomToTop(WalkProcess):
    """Move a uniformly chosen card to the top. No interaction detector."""

    has_detector = False

    def sample_record(self, state, rng):
        return int(rng.integers(1, self.n + 1))

    def _transitions(self, state):
        for c in range(1, self.n + 1):
            yield c, Fraction(1, self.n)

    def replay_step(self, state, record, time=1):
        self._check_state(state)
        if not 1 <= record <= self.n:
            raise InfeasibleRecordError(f"record impossible in state: {record!r}")
        deck = [record] + [x for x in state.map if x != record]
        return Permutation(deck), []

    def relabel_record(self, record, g):
        return g(record)


def all_cards_chosen(records, n):
    """First step by which every card of random-to-top has been chosen, or None.

    A strong stationary time: the deck is uniform at this time, whatever its value.
    """
    seen = set()
    for t, c in enumerate(records, start=1):
        seen.add(c)
        if len(seen) == n:
            return t
    return None
