import numpy as np

from ..errors import ShuffleValidationError
from ..perm import Transposition
from ..processes import InteractionEvent


def as_event(item):
    """Accepts an InteractionEvent, (t, (i, j)) or (t, i, j)."""
    if isinstance(item, InteractionEvent):
        return item
    if len(item) == 2:
        t, (i, j) = item
    elif len(item) == 3:
        t, i, j = item
    else:
        raise ShuffleValidationError(f"Cannot read an interaction event from {item!r}")
    return InteractionEvent(int(t), Transposition(int(i), int(j)), "trace")


def as_trace(trace):
    return [as_event(item) for item in trace]


class InteractionMatrix(object):
    """Latest interaction time of every pair of cards.

    Parameters
    ----------
    n : int
        Deck size.
    since : list of int, optional
        Per-card window start. When given, events at or before ``since[i-1]`` are ignored for
        every pair involving card i.
    """

    def __init__(self, n, since=None):
        self._n = int(n)
        self._last = np.full((self._n, self._n), np.nan)
        if since is not None and len(since) != self._n:
            raise ShuffleValidationError(f"Window starts for {len(since)} cards, deck has {self._n}")
        self._since = None if since is None else list(since)

    @property
    def n(self):
        return self._n

    @property
    def since(self):
        return None if self._since is None else list(self._since)

    @property
    def last_time(self):
        return self._last.copy()

    def get(self, i, j):
        t = self._last[i - 1, j - 1]
        return None if np.isnan(t) else int(t)

    def _in_window(self, event):
        if self._since is None:
            return True
        return all(event.time > self._since[c - 1] for c in event.pair.pair)

    def track(self, events):
        for item in events:
            ev = as_event(item)
            i, j = ev.pair.pair
            if j > self._n:
                raise ShuffleValidationError(f"Event {ev.pair} outside a deck of {self._n} cards")
            if not self._in_window(ev):
                continue
            old = self._last[i - 1, j - 1]
            t = ev.time if np.isnan(old) else max(old, ev.time)
            self._last[i - 1, j - 1] = self._last[j - 1, i - 1] = t
        return self

    def covered(self):
        """Unordered pairs with at least one tracked event."""
        iu = np.triu_indices(self._n, k=1)
        seen = ~np.isnan(self._last[iu])
        return {Transposition(int(i) + 1, int(j) + 1) for i, j, s in zip(*iu, seen) if s}

    def all_covered(self):
        return len(self.covered()) == self._n * (self._n - 1) // 2

    def __repr__(self):
        return f"InteractionMatrix(n={self._n}, covered={len(self.covered())})"


def track(matrix: InteractionMatrix, events):
    return matrix.track(events)
