"""Wash shuffles: cards spread over sites, moved around, then gathered in site order.

States are tuples of piles, one per site, each pile a tuple of labels read top first.
Every wash family also exposes a jumbled view (`view()`), whose states keep only the
positions of the cards (piles stored label-sorted) and whose paths end with a gather record
that fixes the order of every pile.
"""
import itertools
import logging
import math
from fractions import Fraction

from scipy.special import comb

from ..errors import InfeasibleRecordError, ShuffleValidationError
from ..perm import Permutation, Transposition
from .base import (
    LEFT_SWEEP,
    OVERTAKE,
    RIGHT_SWEEP,
    SAME_PILE,
    ShufflingProcess,
    ordered_events,
)

logger = logging.getLogger(__name__)

MOVE_LEFT = "L"
MOVE_RIGHT = "R"
MOVE_STAY = "S"
MOVE_PROBABILITIES = {
    MOVE_LEFT: Fraction(1, 4),
    MOVE_RIGHT: Fraction(1, 4),
    MOVE_STAY: Fraction(1, 2),
}


def sorted_piles(state):
    return tuple(tuple(sorted(pile)) for pile in state)


def piles_to_permutation(state):
    return Permutation(itertools.chain.from_iterable(state))


def card_sites(state):
    """Site index of every card, as a list indexed by label - 1."""
    sites = [0] * sum(len(p) for p in state)
    for q, pile in enumerate(state):
        for c in pile:
            sites[c - 1] = q
    return sites


def same_pile_pairs(state):
    return [Transposition(a, b) for pile in state for a, b in itertools.combinations(pile, 2)]


def gsr_merge(first, second, mask):
    """Interleave two piles: position k of the result comes from `first` iff mask[k] is 1."""
    if len(mask) != len(first) + len(second) or sum(mask) != len(first):
        raise InfeasibleRecordError(
            f"record impossible in state: merge mask {mask} for piles of sizes "
            f"{len(first)} and {len(second)}"
        )
    a, b = iter(first), iter(second)
    return tuple(next(a) if bit else next(b) for bit in mask)


def gsr_masks(a, b):
    """All C(a+b, a) interleavings of piles of sizes a and b."""
    for ones in itertools.combinations(range(a + b), a):
        chosen = set(ones)
        yield tuple(int(k in chosen) for k in range(a + b))


class WashProcess(ShufflingProcess):
    """Shared machinery of the wash families.

    Subclasses describe a step twice: as a positional record (which card goes where) and as
    its completions (insertion slots or merge masks) that fix the order inside piles.
    """

    relabel_equivariant = True

    def __init__(self, spec):
        super().__init__(spec)
        self._view = None

    @property
    def n_sites(self):
        return self.n

    def canonical_start(self):
        return tuple((k + 1,) if k < self.n else () for k in range(self.n_sites))

    def project(self, state):
        return piles_to_permutation(state)

    def relabel_state(self, state, g):
        return tuple(tuple(g(c) for c in pile) for pile in state)

    def view(self):
        if self._view is None:
            self._view = JumbledView(self)
        return self._view

    def _transitions(self, state):
        for jrec, prob in self._positional_transitions(state):
            for rec, cprob in self._completions(state, jrec):
                yield rec, prob * cprob

    def _check_card(self, c, record):
        if not isinstance(c, int) or not 1 <= c <= self.n:
            raise InfeasibleRecordError(f"record impossible in state: {record!r}")

    def positional_twin(self, state, jrec, pair):
        """Same-pile pairs after the step are fixed by the swap, so the record is its own twin."""
        nxt, _ = self.view().replay_step(sorted_piles(state), jrec)
        if self._co_located(nxt, pair):
            return jrec
        raise ShuffleValidationError(f"{pair} does not share a pile after this step")

    @staticmethod
    def _co_located(state, pair):
        sites = card_sites(state)
        return sites[pair.i - 1] == sites[pair.j - 1]


class Wash1D(WashProcess):
    """One-card wash on a line of n positions.

    A step picks a card uniformly and moves it left or right with probability 1/4 each (a
    move off either end holds it in place) or leaves it with probability 1/2. A moved card is
    inserted uniformly into the pile at its destination. Records are ``(card, move, slot)``
    with slot 0 the top; slot is None when the card does not change position.
    """

    def _destination(self, site, move):
        if move == MOVE_LEFT and site > 0:
            return site - 1
        if move == MOVE_RIGHT and site < self.n_sites - 1:
            return site + 1
        return None

    def _positional_transitions(self, state):
        for c in range(1, self.n + 1):
            for move, pm in MOVE_PROBABILITIES.items():
                yield (c, move), Fraction(1, self.n) * pm

    def _completions(self, state, jrec):
        c, move = jrec
        dest = self._destination(card_sites(state)[c - 1], move)
        if dest is None:
            yield (c, move, None), Fraction(1)
            return
        k = len(state[dest])
        for slot in range(k + 1):
            yield (c, move, slot), Fraction(1, k + 1)

    def sample_record(self, state, rng):
        c = int(rng.integers(1, self.n + 1))
        u = rng.random()
        move = MOVE_LEFT if u < 0.25 else (MOVE_RIGHT if u < 0.5 else MOVE_STAY)
        dest = self._destination(card_sites(state)[c - 1], move)
        slot = None if dest is None else int(rng.integers(0, len(state[dest]) + 1))
        return (c, move, slot)

    def replay_step(self, state, record, time=1):
        c, move, slot = record
        self._check_card(c, record)
        if move not in MOVE_PROBABILITIES:
            raise InfeasibleRecordError(f"record impossible in state: {record!r}")
        site = card_sites(state)[c - 1]
        dest = self._destination(site, move)
        piles = list(state)
        if dest is None:
            if slot is not None:
                raise InfeasibleRecordError(f"record impossible in state: {record!r}")
        else:
            if slot is None or not 0 <= slot <= len(state[dest]):
                raise InfeasibleRecordError(f"record impossible in state: {record!r}")
            piles[site] = tuple(x for x in state[site] if x != c)
            target = list(state[dest])
            target.insert(slot, c)
            piles[dest] = tuple(target)
        nxt = tuple(piles)
        return nxt, ordered_events(same_pile_pairs(nxt), SAME_PILE, time)

    def forget_order(self, record):
        return record[:2]

    def complete_order(self, state, jrec):
        c, move = jrec
        self._check_card(c, jrec)
        dest = self._destination(card_sites(state)[c - 1], move)
        return (c, move, None if dest is None else 0)

    def positional_probability(self, state, jrec):
        c, move = jrec
        self._check_card(c, jrec)
        if move not in MOVE_PROBABILITIES:
            raise InfeasibleRecordError(f"record impossible in state: {jrec!r}")
        return Fraction(1, self.n) * MOVE_PROBABILITIES[move]

    def relabel_record(self, record, g):
        return (g(record[0]),) + tuple(record[1:])

    relabel_positional = relabel_record


def vertex_coords(v, side, d):
    coords = []
    for _ in range(d):
        v, r = divmod(v, side)
        coords.append(r)
    return tuple(reversed(coords))


def vertex_index(coords, side):
    v = 0
    for x in coords:
        v = v * side + x
    return v


class WashGrid(WashProcess):
    """One-card wash on the d-dimensional grid of side n, vertices in lexicographic order.

    With probability 1/2 the chosen card stays; otherwise it moves to a neighbour chosen
    uniformly among the neighbours that exist. Records are ``(card, target, slot)`` with
    target None for a stay.
    """

    def __init__(self, spec):
        super().__init__(spec)
        self._neighbours = {}

    @property
    def d(self):
        return self.spec.d

    @property
    def n_sites(self):
        return self.n**self.d

    def neighbours(self, v):
        if v not in self._neighbours:
            coords = vertex_coords(v, self.n, self.d)
            out = []
            for axis in range(self.d):
                for step in (-1, 1):
                    x = coords[axis] + step
                    if 0 <= x < self.n:
                        moved = coords[:axis] + (x,) + coords[axis + 1:]
                        out.append(vertex_index(moved, self.n))
            self._neighbours[v] = tuple(sorted(out))
        return self._neighbours[v]

    def _positional_transitions(self, state):
        sites = card_sites(state)
        for c in range(1, self.n + 1):
            yield (c, None), Fraction(1, 2 * self.n)
            nbrs = self.neighbours(sites[c - 1])
            for w in nbrs:
                yield (c, w), Fraction(1, 2 * self.n * len(nbrs))

    def _completions(self, state, jrec):
        c, target = jrec
        if target is None:
            yield (c, None, None), Fraction(1)
            return
        k = len(state[target])
        for slot in range(k + 1):
            yield (c, target, slot), Fraction(1, k + 1)

    def sample_record(self, state, rng):
        c = int(rng.integers(1, self.n + 1))
        if rng.random() < 0.5:
            return (c, None, None)
        nbrs = self.neighbours(card_sites(state)[c - 1])
        target = nbrs[int(rng.integers(0, len(nbrs)))]
        return (c, target, int(rng.integers(0, len(state[target]) + 1)))

    def replay_step(self, state, record, time=1):
        c, target, slot = record
        self._check_card(c, record)
        piles = list(state)
        if target is None:
            if slot is not None:
                raise InfeasibleRecordError(f"record impossible in state: {record!r}")
        else:
            site = card_sites(state)[c - 1]
            if target not in self.neighbours(site) or slot is None or not 0 <= slot <= len(state[target]):
                raise InfeasibleRecordError(f"record impossible in state: {record!r}")
            piles[site] = tuple(x for x in state[site] if x != c)
            pile = list(state[target])
            pile.insert(slot, c)
            piles[target] = tuple(pile)
        nxt = tuple(piles)
        return nxt, ordered_events(same_pile_pairs(nxt), SAME_PILE, time)

    def forget_order(self, record):
        return record[:2]

    def complete_order(self, state, jrec):
        c, target = jrec
        return (c, target, None if target is None else 0)

    def positional_probability(self, state, jrec):
        c, target = jrec
        self._check_card(c, jrec)
        if target is None:
            return Fraction(1, 2 * self.n)
        nbrs = self.neighbours(card_sites(state)[c - 1])
        if target not in nbrs:
            raise InfeasibleRecordError(f"record impossible in state: {jrec!r}")
        return Fraction(1, 2 * self.n * len(nbrs))

    def relabel_record(self, record, g):
        return (g(record[0]),) + tuple(record[1:])

    relabel_positional = relabel_record


class Wash1DLong(WashProcess):
    """Long-range wash on a line: a right sweep then a left sweep per step.

    In each sweep every card moves a geometric number of places, ``P(d) = (1-p)^d p`` for
    d = 0, 1, ...; a card that would pass the wall stops there and takes the whole tail mass.
    The wall is therefore the only displacement cap and the record space is finite.

    Records are ``(dR, dL, right_merge, left_merge)``: clamped displacements indexed by
    label - 1, and the choices fixing pile order. With ``merge="gsr"`` the choices are the
    merge masks met while the sweep moves position by position; with ``merge="insertion"``
    they are the slots at which moving cards are inserted one at a time, in label order.
    """

    relabel_equivariant = False
    max_enumeration_n = 4

    @property
    def p(self):
        return self.spec.p

    @property
    def merge(self):
        return self.spec.merge

    def _disp_probability(self, d, at_wall):
        tail = (1 - self.p) ** d
        return tail if at_wall else tail * self.p

    def landings(self, state, dR, dL, record=None):
        """Positions before, between and after the two sweeps, indexed by label - 1."""
        if len(dR) != self.n or len(dL) != self.n:
            raise InfeasibleRecordError(f"record impossible in state: {record!r}")
        pos = card_sites(state)
        mid = [q + d for q, d in zip(pos, dR)]
        end = [q - d for q, d in zip(mid, dL)]
        if any(d < 0 for d in itertools.chain(dR, dL)) or max(mid) > self.n - 1 or min(end) < 0:
            raise InfeasibleRecordError(f"record impossible in state: {record!r}")
        return pos, mid, end

    def _positional_transitions(self, state):
        pos = card_sites(state)
        last = self.n - 1
        right = [
            [(d, self._disp_probability(d, q + d == last)) for d in range(last - q + 1)]
            for q in pos
        ]
        for rchoice in itertools.product(*right):
            dR = tuple(d for d, _ in rchoice)
            rprob = math.prod((pr for _, pr in rchoice), start=Fraction(1))
            mid = [q + d for q, d in zip(pos, dR)]
            left = [[(d, self._disp_probability(d, m - d == 0)) for d in range(m + 1)] for m in mid]
            for lchoice in itertools.product(*left):
                dL = tuple(d for d, _ in lchoice)
                lprob = math.prod((pr for _, pr in lchoice), start=Fraction(1))
                yield (dR, dL), rprob * lprob

    def positional_probability(self, state, jrec):
        dR, dL = jrec
        _, mid, end = self.landings(state, dR, dL, jrec)
        prob = Fraction(1)
        for d, m in zip(dR, mid):
            prob *= self._disp_probability(d, m == self.n - 1)
        for d, e in zip(dL, end):
            prob *= self._disp_probability(d, e == 0)
        return prob

    def _sweep(self, piles, land, direction, pick):
        """Moves cards position by position; `pick(a, b)` returns the mask of each merge."""
        piles = list(piles)
        order = range(self.n) if direction > 0 else range(self.n - 1, -1, -1)
        carry = ()
        for q in order:
            drop = tuple(c for c in carry if land[c - 1] == q)
            carry_on = tuple(c for c in carry if land[c - 1] != q)
            stay = tuple(c for c in piles[q] if land[c - 1] == q)
            depart = tuple(c for c in piles[q] if land[c - 1] != q)
            piles[q] = self._merge(drop, stay, pick)
            carry = self._merge(carry_on, depart, pick)
        if carry:
            raise InfeasibleRecordError("record impossible in state: cards left the table")
        return tuple(piles)

    @staticmethod
    def _merge(first, second, pick):
        if not first or not second:
            return first + second
        return gsr_merge(first, second, pick(len(first), len(second)))

    def _insertion_sweep(self, piles, land, pick):
        """Moves the travelling cards one at a time; `pick(size)` returns each insertion slot."""
        piles = [list(p) for p in piles]
        sites = card_sites(piles)
        for c in range(1, self.n + 1):
            if land[c - 1] == sites[c - 1]:
                continue
            piles[sites[c - 1]].remove(c)
            target = piles[land[c - 1]]
            target.insert(pick(len(target)), c)
        return tuple(tuple(p) for p in piles)

    def _run(self, state, dR, dL, rpick, lpick, record=None):
        pos, mid, end = self.landings(state, dR, dL, record)
        if self.merge == "insertion":
            half = self._insertion_sweep(state, mid, rpick)
            final = self._insertion_sweep(half, end, lpick)
        else:
            half = self._sweep(state, mid, 1, rpick)
            final = self._sweep(half, end, -1, lpick)
        return pos, mid, end, half, final

    def _choice_sizes(self, state, dR, dL):
        sizes = ([], [])

        def recorder(side):
            def pick(*shape):
                sizes[side].append(shape)
                if self.merge == "insertion":
                    return 0
                a, b = shape
                return (1,) * a + (0,) * b

            return pick

        self._run(state, dR, dL, recorder(0), recorder(1))
        return sizes

    def _options(self, shape):
        if self.merge == "insertion":
            (size,) = shape
            return [(slot, Fraction(1, size + 1)) for slot in range(size + 1)]
        a, b = shape
        prob = Fraction(1, int(comb(a + b, a, exact=True)))
        return [(mask, prob) for mask in gsr_masks(a, b)]

    def _completions(self, state, jrec):
        dR, dL = jrec
        rsizes, lsizes = self._choice_sizes(state, dR, dL)
        roptions = [self._options(s) for s in rsizes]
        loptions = [self._options(s) for s in lsizes]
        for rchoice in itertools.product(*roptions):
            for lchoice in itertools.product(*loptions):
                prob = math.prod((pr for _, pr in rchoice + lchoice), start=Fraction(1))
                yield (
                    (dR, dL, tuple(c for c, _ in rchoice), tuple(c for c, _ in lchoice)),
                    prob,
                )

    def sample_record(self, state, rng):
        pos = card_sites(state)
        last = self.n - 1
        raw = rng.geometric(float(self.p), size=(2, self.n)) - 1
        dR = tuple(int(min(d, last - q)) for d, q in zip(raw[0], pos))
        mid = [q + d for q, d in zip(pos, dR)]
        dL = tuple(int(min(d, m)) for d, m in zip(raw[1], mid))
        choices = ([], [])

        def sampler(side):
            def pick(*shape):
                if self.merge == "insertion":
                    (size,) = shape
                    choice = int(rng.integers(0, size + 1))
                else:
                    a, b = shape
                    ones = set(rng.choice(a + b, size=a, replace=False).tolist())
                    choice = tuple(int(k in ones) for k in range(a + b))
                choices[side].append(choice)
                return choice

            return pick

        self._run(state, dR, dL, sampler(0), sampler(1))
        return (dR, dL, tuple(choices[0]), tuple(choices[1]))

    def replay_step(self, state, record, time=1):
        try:
            dR, dL, rchoices, lchoices = record
        except (TypeError, ValueError):
            raise InfeasibleRecordError(f"record impossible in state: {record!r}")
        feeds = (iter(rchoices), iter(lchoices))

        def feeder(side):
            def pick(*shape):
                choice = next(feeds[side], None)
                if choice is None:
                    raise InfeasibleRecordError(f"record impossible in state: {record!r}")
                if self.merge == "insertion" and not 0 <= choice <= shape[0]:
                    raise InfeasibleRecordError(f"record impossible in state: {record!r}")
                return choice

            return pick

        pos, mid, end, _, final = self._run(state, tuple(dR), tuple(dL), feeder(0), feeder(1), record)
        if any(next(f, None) is not None for f in feeds):
            raise InfeasibleRecordError(f"record impossible in state: {record!r}")
        return final, self._events(pos, mid, end, final, time)

    def _events(self, pos, mid, end, final, time):
        right, left = [], []
        for a, b in itertools.combinations(range(1, self.n + 1), 2):
            i, j = a - 1, b - 1
            if (pos[i] < pos[j] and mid[i] >= mid[j]) or (pos[j] < pos[i] and mid[j] >= mid[i]):
                right.append(Transposition(a, b))
            if (mid[i] > mid[j] and end[i] <= end[j]) or (mid[j] > mid[i] and end[j] <= end[i]):
                left.append(Transposition(a, b))
        return (
            ordered_events(right, OVERTAKE, time, RIGHT_SWEEP)
            + ordered_events(left, OVERTAKE, time, LEFT_SWEEP)
            + ordered_events(same_pile_pairs(final), SAME_PILE, time)
        )

    def forget_order(self, record):
        return (tuple(record[0]), tuple(record[1]))

    def complete_order(self, state, jrec):
        dR, dL = jrec
        rsizes, lsizes = self._choice_sizes(state, dR, dL)
        return (dR, dL, tuple(self._options(s)[0][0] for s in rsizes), tuple(self._options(s)[0][0] for s in lsizes))

    def relabel_positional(self, jrec, g):
        dR, dL = jrec
        nR, nL = [0] * self.n, [0] * self.n
        for c in range(1, self.n + 1):
            nR[g(c) - 1] = dR[c - 1]
            nL[g(c) - 1] = dL[c - 1]
        return (tuple(nR), tuple(nL))

    def positional_twin(self, state, jrec, pair):
        """Twin of an overtake: the two cards exchange landings in the sweep where it happened.

        Overtakes in the right sweep also exchange the two cards' left displacements, so the
        whole step ends at the pair-relabeled state.
        """
        dR, dL = jrec
        pos, mid, end = self.landings(state, dR, dL, jrec)
        i, j = pair.i - 1, pair.j - 1
        if end[i] == end[j]:
            return jrec
        nR, nL = list(dR), list(dL)
        if (pos[i] - pos[j]) * (mid[i] - mid[j]) < 0 or (pos[i] != pos[j] and mid[i] == mid[j]):
            nR[i], nR[j] = mid[j] - pos[i], mid[i] - pos[j]
            nL[i], nL[j] = dL[j], dL[i]
        elif (mid[i] - mid[j]) * (end[i] - end[j]) < 0 or (mid[i] != mid[j] and end[i] == end[j]):
            nL[i], nL[j] = mid[i] - end[j], mid[j] - end[i]
        else:
            raise ShuffleValidationError(f"{pair} neither overtook nor shares a pile in this step")
        return (tuple(nR), tuple(nL))


class JumbledView(ShufflingProcess):
    """Positions-only view of a wash family.

    Piles are stored label-sorted; a path is finished by a gather record that orders every
    pile, each ordering having probability 1/|pile|!.
    """

    jumbled = True

    def __init__(self, ordered: WashProcess):
        super().__init__(ordered.spec)
        self._ordered = ordered
        self.relabel_equivariant = ordered.relabel_equivariant
        self.max_enumeration_n = ordered.max_enumeration_n

    @property
    def ordered(self):
        return self._ordered

    def canonical_start(self):
        return sorted_piles(self._ordered.canonical_start())

    def sample_record(self, state, rng):
        return self._ordered.forget_order(self._ordered.sample_record(state, rng))

    def replay_step(self, state, record, time=1):
        full = self._ordered.complete_order(state, record)
        nxt, events = self._ordered.replay_step(state, full, time=time)
        return sorted_piles(nxt), events

    def _transitions(self, state):
        return self._ordered._positional_transitions(state)

    def record_probability(self, state, record):
        self.replay_step(state, record)
        return self._ordered.positional_probability(state, record)

    def project(self, state):
        raise ShuffleValidationError("jumbled piles project only through a gather record")

    def relabel_state(self, state, g):
        return sorted_piles(self._ordered.relabel_state(state, g))

    def relabel_record(self, record, g):
        return self._ordered.relabel_positional(record, g)

    def twin_record(self, state, record, pair):
        return self._ordered.positional_twin(state, record, pair)

    def gather_options(self, state):
        prob = self.gather_probability(state, state)
        for orders in itertools.product(*(itertools.permutations(pile) for pile in state)):
            gather = tuple(tuple(o) for o in orders)
            yield gather, piles_to_permutation(gather), prob

    def gather_probability(self, state, gather):
        return Fraction(1, math.prod(math.factorial(len(p)) for p in state))

    def apply_gather(self, state, gather):
        if sorted_piles(gather) != state:
            raise InfeasibleRecordError(f"record impossible in state: gather {gather!r}")
        return piles_to_permutation(gather)

    def relabel_gather(self, gather, g):
        return tuple(tuple(g(c) for c in pile) for pile in gather)

    def view(self):
        return self
