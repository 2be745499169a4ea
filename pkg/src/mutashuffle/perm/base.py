"""Permutations of {1..n} in position-to-label form.

A `Permutation` is stored as the tuple of card labels read from position 1 (top) to
position n. As a function, ``pi(p)`` is the label at position ``p``.

Composition convention: ``compose(a, b)`` applies ``b`` first and then ``a``, so
``compose(a, b)(x) == a(b(x))``. Multiplying on the left is therefore the label action
(``compose(g, pi)`` renames every card ``c`` to ``g(c)``), and multiplying on the right acts
on positions. Every other module states its side of multiplication relative to this.
"""
import itertools
import re
from dataclasses import dataclass
from typing import Iterable, List, Tuple

from ..errors import ShuffleValidationError


class Permutation:
    """A bijection of {1..n}, positions to labels, 1-based.

    Parameters
    ----------
    labels : iterable of int
        Label at each position, top first. Must contain each of 1..n exactly once.
    """

    __slots__ = ("_map",)

    def __init__(self, labels: Iterable[int]):
        labels = tuple(int(x) for x in labels)
        n = len(labels)
        if n < 1:
            raise ShuffleValidationError("A permutation needs at least one card")
        if sorted(labels) != list(range(1, n + 1)):
            raise ShuffleValidationError(f"Not a bijection on 1..{n}: {list(labels)}")
        self._map = labels

    @classmethod
    def identity(cls, n):
        return cls(range(1, n + 1))

    @classmethod
    def transposition(cls, n, i, j):
        labels = list(range(1, n + 1))
        labels[i - 1], labels[j - 1] = labels[j - 1], labels[i - 1]
        return cls(labels)

    @classmethod
    def from_cycles(cls, n, cycles):
        labels = list(range(1, n + 1))
        for cyc in cycles:
            for k, x in enumerate(cyc):
                labels[x - 1] = cyc[(k + 1) % len(cyc)]
        return cls(labels)

    @classmethod
    def from_text(cls, text):
        """Parses the one-line form "[2,1,3]"."""
        return cls(int(x) for x in re.findall(r"\d+", text))

    @property
    def n(self):
        return len(self._map)

    @property
    def map(self) -> Tuple[int, ...]:
        return self._map

    def __call__(self, x):
        return self._map[x - 1]

    def __getitem__(self, position):
        return self._map[position - 1]

    def __iter__(self):
        return iter(self._map)

    def __len__(self):
        return len(self._map)

    def __eq__(self, other):
        return isinstance(other, Permutation) and self._map == other._map

    def __lt__(self, other):
        return self._map < other._map

    def __hash__(self):
        return hash(self._map)

    def __mul__(self, other):
        return compose(self, other)

    def __repr__(self):
        return f"Permutation({list(self._map)})"

    def __str__(self):
        return "[" + ",".join(str(x) for x in self._map) + "]"

    def position_of(self, label):
        return self._map.index(label) + 1

    def is_identity(self):
        return all(x == k for k, x in enumerate(self._map, start=1))

    def to_json(self):
        return list(self._map)


@dataclass(frozen=True, order=True)
class Transposition:
    """Unordered label pair (i j), normalized so that i < j."""

    i: int
    j: int

    def __post_init__(self):
        if self.i == self.j:
            raise ShuffleValidationError(f"Transposition needs two distinct labels, got {self.i}")
        if self.i > self.j:
            lo, hi = self.j, self.i
            object.__setattr__(self, "i", lo)
            object.__setattr__(self, "j", hi)

    @classmethod
    def of(cls, pair):
        i, j = pair
        return cls(int(i), int(j))

    @property
    def pair(self):
        return (self.i, self.j)

    def as_permutation(self, n):
        if self.j > n:
            raise ShuffleValidationError(f"{self} does not act on {n} cards")
        return Permutation.transposition(n, self.i, self.j)

    def apply(self, label):
        if label == self.i:
            return self.j
        if label == self.j:
            return self.i
        return label

    def conjugate(self, g: Permutation):
        """The pair (g(i) g(j)), i.e. g (i j) g^-1."""
        return Transposition(g(self.i), g(self.j))

    def __str__(self):
        return f"({self.i} {self.j})"

    def to_json(self):
        return [self.i, self.j]


@dataclass(frozen=True)
class CycleDecomposition:
    """Canonical cycles: each rotated to start at its minimum, sorted by minimum."""

    n: int
    cycles: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        seen = sorted(itertools.chain.from_iterable(self.cycles))
        if seen != list(range(1, self.n + 1)):
            raise ShuffleValidationError("Cycles must partition 1..n")

    def to_permutation(self):
        return Permutation.from_cycles(self.n, self.cycles)

    def cycle_of(self, label):
        for cyc in self.cycles:
            if label in cyc:
                return cyc
        raise ShuffleValidationError(f"Label {label} outside 1..{self.n}")

    def __len__(self):
        return len(self.cycles)

    def __str__(self):
        return "".join("(" + " ".join(str(x) for x in c) + ")" for c in self.cycles)

    @classmethod
    def from_text(cls, n, text):
        cycles = [
            tuple(int(x) for x in grp.split())
            for grp in re.findall(r"\(([^)]*)\)", text)
            if grp.strip()
        ]
        covered = set(itertools.chain.from_iterable(cycles))
        cycles += [(x,) for x in range(1, n + 1) if x not in covered]
        return canonical_cycles(n, cycles)

    def to_json(self):
        return str(self)


def canonical_cycles(n, cycles) -> CycleDecomposition:
    rotated = []
    for cyc in cycles:
        cyc = tuple(cyc)
        k = cyc.index(min(cyc))
        rotated.append(cyc[k:] + cyc[:k])
    return CycleDecomposition(n, tuple(sorted(rotated, key=lambda c: c[0])))


def _check_same_size(a, b):
    if a.n != b.n:
        raise ShuffleValidationError(
            f"Incompatible deck sizes: {a.n} and {b.n}"
        )


def compose(a: Permutation, b: Permutation) -> Permutation:
    """Apply `b` first, then `a`."""
    _check_same_size(a, b)
    am = a.map
    return Permutation(am[x - 1] for x in b.map)


def invert(a: Permutation) -> Permutation:
    inv = [0] * a.n
    for p, label in enumerate(a.map, start=1):
        inv[label - 1] = p
    return Permutation(inv)


def cycles(a: Permutation) -> CycleDecomposition:
    seen = set()
    out = []
    for start in range(1, a.n + 1):
        if start in seen:
            continue
        cyc = []
        x = start
        while x not in seen:
            seen.add(x)
            cyc.append(x)
            x = a(x)
        out.append(tuple(cyc))
    # starts are visited in increasing order, so each cycle already begins at its minimum
    return CycleDecomposition(a.n, tuple(out))


def cycle_labels(a: Permutation) -> List[int]:
    """Cycle index of every label (list indexed by label - 1)."""
    owner = [-1] * a.n
    k = 0
    for start in range(1, a.n + 1):
        if owner[start - 1] >= 0:
            continue
        x = start
        while owner[x - 1] < 0:
            owner[x - 1] = k
            x = a(x)
        k += 1
    return owner


def cayley_length(a: Permutation) -> int:
    """n minus the number of cycles, fixed points included."""
    return a.n - (max(cycle_labels(a)) + 1)


def length_decreases(a: Permutation, t: Transposition) -> bool:
    """True iff t's labels share a cycle of a.

    Then both ``compose(t, a)`` and ``compose(a, t)`` are one shorter than ``a``; otherwise
    both are one longer.
    """
    if t.j > a.n:
        raise ShuffleValidationError(f"{t} does not act on {a.n} cards")
    owner = cycle_labels(a)
    return owner[t.i - 1] == owner[t.j - 1]


def act_on_labels(g: Permutation, a: Permutation) -> Permutation:
    """Label action g.a: every card c is renamed g(c)."""
    return compose(g, a)


def all_permutations(n):
    """All of S_n in lexicographic order of the one-line form."""
    return [Permutation(p) for p in itertools.permutations(range(1, n + 1))]


def all_transpositions(n):
    return [Transposition(i, j) for i, j in itertools.combinations(range(1, n + 1), 2)]
