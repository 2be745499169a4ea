"""Transposition factorizations of permutations.

Two products are supported:

* the star product ``(1 a_1)(2 a_2)...(n a_n)`` with ``a_i <= i``, which is unique;
* ordered subsequence products of a transposition sequence, found greedily.

Products are read left to right under the `compose` convention of `perm.base`, i.e. the
rightmost factor is applied first.
"""
import functools
import itertools
import logging
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.special import comb

from ..errors import GuardExceededError, IncompleteSequenceError, ShuffleValidationError
from ..utils.seeding import replica_rng
from .base import (
    Permutation,
    Transposition,
    all_transpositions,
    compose,
    cycle_labels,
    invert,
)

logger = logging.getLogger(__name__)

MAX_REACHABLE_N = 8
DEFAULT_SPANNING_SEEDS = 10_000


@dataclass(frozen=True)
class StarVector:
    n: int
    a: Tuple[int, ...]

    def __post_init__(self):
        a = tuple(int(x) for x in self.a)
        object.__setattr__(self, "a", a)
        if len(a) != self.n:
            raise ShuffleValidationError(f"Star vector needs {self.n} entries, got {len(a)}")
        for i, ai in enumerate(a, start=1):
            if not 1 <= ai <= i:
                raise ShuffleValidationError(f"Star vector entry a[{i}]={ai} outside 1..{i}")

    def factors(self):
        """The nontrivial factors (i a_i), in index order."""
        return [Transposition(i, ai) for i, ai in enumerate(self.a, start=1) if ai != i]

    def to_json(self):
        return {"n": self.n, "a": list(self.a)}


@dataclass(frozen=True)
class TranspositionSequence:
    n: int
    seq: Tuple[Transposition, ...] = ()

    def __post_init__(self):
        seq = tuple(t if isinstance(t, Transposition) else Transposition.of(t) for t in self.seq)
        object.__setattr__(self, "seq", seq)
        for t in seq:
            if t.j > self.n:
                raise ShuffleValidationError(f"{t} does not act on {self.n} cards")

    @classmethod
    def all_distinct(cls, n, rng=None):
        """Every transposition of S_n exactly once, lexicographic or shuffled by `rng`."""
        seq = all_transpositions(n)
        if rng is not None:
            seq = [seq[k] for k in rng.permutation(len(seq))]
        return cls(n, tuple(seq))

    @classmethod
    def random_iid(cls, n, length, rng):
        pool = all_transpositions(n)
        picks = rng.integers(0, len(pool), size=length)
        return cls(n, tuple(pool[k] for k in picks))

    def prefix(self, m):
        return TranspositionSequence(self.n, self.seq[:m])

    def missing(self):
        present = set(self.seq)
        return [t for t in all_transpositions(self.n) if t not in present]

    def __len__(self):
        return len(self.seq)

    def __iter__(self):
        return iter(self.seq)

    def __getitem__(self, k):
        return self.seq[k]

    def to_json(self):
        return [t.to_json() for t in self.seq]


@dataclass(frozen=True)
class SubsequenceMask:
    eps: Tuple[int, ...]

    def __post_init__(self):
        eps = tuple(int(bool(e)) for e in self.eps)
        object.__setattr__(self, "eps", eps)

    def __len__(self):
        return len(self.eps)

    def selected(self):
        return [k for k, e in enumerate(self.eps) if e]

    def to_json(self):
        return list(self.eps)


def evaluate_star(v: StarVector) -> Permutation:
    out = Permutation.identity(v.n)
    for i in range(v.n, 0, -1):
        if v.a[i - 1] != i:
            out = compose(Permutation.transposition(v.n, i, v.a[i - 1]), out)
    return out


def star_factor(pi: Permutation) -> StarVector:
    """Unique a with a_i <= i and (1 a_1)...(n a_n) == pi.

    Peels factors from the right: the product of the first i-1 factors fixes i, so
    ``a_i`` is the position that pi maps to label i.
    """
    n = pi.n
    a = [0] * n
    cur = pi
    for i in range(n, 0, -1):
        ai = invert(cur)(i)
        a[i - 1] = ai
        if ai != i:
            cur = compose(cur, Permutation.transposition(n, i, ai))
    return StarVector(n, tuple(a))


def evaluate_subsequence(seq: TranspositionSequence, mask: SubsequenceMask) -> Permutation:
    if len(seq) != len(mask):
        raise ShuffleValidationError(
            f"Mask length {len(mask)} does not match sequence length {len(seq)}"
        )
    out = Permutation.identity(seq.n)
    for k in reversed(mask.selected()):
        out = compose(seq[k].as_permutation(seq.n), out)
    return out


@dataclass(frozen=True)
class GreedyStep:
    index: int
    transposition: Transposition
    selected: bool
    residual: Permutation


def greedy_walk(seq: TranspositionSequence, sigma: Permutation) -> Iterator[GreedyStep]:
    """Walks the sequence, peeling each transposition whose labels share a cycle of the residual.

    The residual starts at sigma and is left-multiplied by every selected transposition, so
    ``sigma == s_k1 s_k2 ... s_km`` when the walk reaches the identity.
    """
    if sigma.n != seq.n:
        raise ShuffleValidationError(f"Incompatible deck sizes: {sigma.n} and {seq.n}")
    residual = sigma
    for k, t in enumerate(seq):
        owner = cycle_labels(residual)
        take = owner[t.i - 1] == owner[t.j - 1]
        if take:
            residual = compose(t.as_permutation(seq.n), residual)
        yield GreedyStep(k, t, take, residual)


def greedy_subsequence_factor(seq: TranspositionSequence, sigma: Permutation) -> SubsequenceMask:
    missing = seq.missing()
    if missing:
        raise IncompleteSequenceError(
            "incomplete generating sequence: missing " + " ".join(str(t) for t in missing)
        )
    return SubsequenceMask(tuple(int(step.selected) for step in greedy_walk(seq, sigma)))


@functools.lru_cache(maxsize=None)
def _sn_tables(n):
    """Lexicographic S_n with right-multiplication tables for every transposition.

    ``rmul[k, q]`` is the index of ``compose(perm_q, t_k)``; t_k is an involution, so it is
    also the index of the unique p with ``compose(p, t_k) == perm_q``.
    """
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)
    weights = n ** np.arange(n - 1, -1, -1, dtype=np.int64)
    codes = perms @ weights
    pairs = all_transpositions(n)
    rmul = np.empty((len(pairs), len(perms)), dtype=np.int64)
    for k, t in enumerate(pairs):
        swapped = perms.copy()
        swapped[:, [t.i - 1, t.j - 1]] = swapped[:, [t.j - 1, t.i - 1]]
        rmul[k] = np.searchsorted(codes, swapped @ weights)
    identity = 0
    return perms, rmul, {t: k for k, t in enumerate(pairs)}, identity


def _check_reachable_guard(n):
    if n > MAX_REACHABLE_N:
        raise GuardExceededError(
            f"state space too large for exact reachable set: n={n} > {MAX_REACHABLE_N}"
        )


def _prefix_masks(seq):
    """Yields the reachable-set indicator after each prefix, starting with the empty one."""
    perms, rmul, index, identity = _sn_tables(seq.n)
    mask = np.zeros(len(perms), dtype=bool)
    mask[identity] = True
    yield mask
    for t in seq:
        mask = mask | mask[rmul[index[t]]]
        yield mask


def reachable_set(seq: TranspositionSequence):
    """All subsequence products of `seq`, by the prefix recursion R_k = R_{k-1} u R_{k-1} s_k."""
    _check_reachable_guard(seq.n)
    mask = None
    for mask in _prefix_masks(seq):
        pass
    perms = _sn_tables(seq.n)[0]
    return frozenset(Permutation(perms[q] + 1) for q in np.flatnonzero(mask))


def min_spanning_prefix(seq: TranspositionSequence) -> Optional[int]:
    _check_reachable_guard(seq.n)
    for m, mask in enumerate(_prefix_masks(seq)):
        if mask.all():
            return m
    return None


def coupon_collector_expectation(n):
    """Expected number of uniform draws to see all C(n,2) transpositions."""
    k = int(comb(n, 2, exact=True))
    return k * sum(1.0 / m for m in range(1, k + 1))


def spanning_trial(n, rng):
    """Draws i.i.d. uniform transpositions until every one has appeared.

    Returns (min_spanning_prefix, coupon_collector_steps) of the drawn sequence.
    """
    _check_reachable_guard(n)
    perms, rmul, _, identity = _sn_tables(n)
    k = rmul.shape[0]
    mask = np.zeros(len(perms), dtype=bool)
    mask[identity] = True
    spanned = 0 if mask.all() else None
    seen = np.zeros(k, dtype=bool)
    steps = 0
    while not seen.all():
        pick = int(rng.integers(0, k))
        seen[pick] = True
        steps += 1
        mask = mask | mask[rmul[pick]]
        if spanned is None and mask.all():
            spanned = steps
    return spanned, steps


def spanning_experiment(n_list: Sequence[int], seeds=DEFAULT_SPANNING_SEEDS, base_seed=0):
    """Distribution of the shortest spanning prefix of an i.i.d. transposition sequence.

    Parameters
    ----------
    n_list : list of int
        Deck sizes to run.
    seeds : int or list of int
        Either a count (seeds ``0..seeds-1``) or an explicit list of per-trial seeds.
    base_seed : int
        Global seed mixed into every trial generator.

    Returns
    -------
    pd.DataFrame
        Columns ``n, seed, min_spanning_prefix, coupon_collector_steps``.
    """
    if isinstance(seeds, int):
        seeds = range(seeds)
    rows = []
    for n in n_list:
        logger.info(f"Spanning experiment for n={n} over {len(seeds)} seeds")
        for s in seeds:
            spanned, steps = spanning_trial(n, replica_rng(base_seed, n, s))
            rows.append((n, s, spanned, steps))
    return pd.DataFrame(
        rows, columns=["n", "seed", "min_spanning_prefix", "coupon_collector_steps"]
    )
