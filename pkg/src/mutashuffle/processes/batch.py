"""Vectorised simulation of many replicas at once, for first-interaction statistics.

Kernels keep only what the detectors need (card positions, or the deck) as numpy arrays
with one row per replica. Labels and positions are 0-based here. The detectors agree with
the reference steppers in `wash` and `walks`.
"""
import logging
import math

import numpy as np

from ..errors import ShuffleValidationError
from .base import (
    ADJ_TRANSPOSITION,
    CYCLE_TRANSPOSITION,
    ProcessSpec,
    RANDOM_TO_RANDOM,
    WASH1D,
    WASH1D_LONG,
    WASH_GRID,
)

logger = logging.getLogger(__name__)

DEFAULT_T_MAX_FACTOR = 40


def default_t_max(spec: ProcessSpec):
    """Generous step cap, a constant multiple of the expected all-pairs order of the family."""
    n = spec.n
    log_n = math.log(n + 1)
    if spec.family == WASH_GRID:
        order = n ** (2 * spec.d + 1) * log_n
    elif spec.family == RANDOM_TO_RANDOM:
        order = n**2 * log_n
    elif spec.family == WASH1D_LONG:
        order = n**2 * log_n
    else:
        order = n**3 * log_n
    return int(DEFAULT_T_MAX_FACTOR * order) + 10


class _Kernel(object):
    dense = False

    def __init__(self, spec, replicas):
        self.n = spec.n
        self.spec = spec

    def keep(self, mask):
        for name in self._arrays:
            setattr(self, name, getattr(self, name)[mask])


class _Wash1DKernel(_Kernel):
    _arrays = ("pos",)

    def __init__(self, spec, replicas):
        super().__init__(spec, replicas)
        self.pos = np.tile(np.arange(self.n), (replicas, 1))

    def step(self, rng):
        A = len(self.pos)
        rows = np.arange(A)
        c = rng.integers(0, self.n, A)
        u = rng.random(A)
        delta = np.where(u < 0.25, -1, np.where(u < 0.5, 1, 0))
        old = self.pos[rows, c]
        new = old + delta
        new = np.where((new >= 0) & (new < self.n), new, old)
        self.pos[rows, c] = new
        r, k = np.nonzero(self.pos == new[:, None])
        return r, c[r], k


class _WashGridKernel(_Kernel):
    _arrays = ("coords",)

    def __init__(self, spec, replicas):
        super().__init__(spec, replicas)
        self.d = spec.d
        start = np.zeros((self.n, self.d), dtype=np.int64)
        start[:, -1] = np.arange(self.n)
        self.coords = np.tile(start, (replicas, 1, 1))

    def step(self, rng):
        A = len(self.coords)
        rows = np.arange(A)
        c = rng.integers(0, self.n, A)
        move = rng.random(A) >= 0.5
        pick = rng.random(A)
        here = self.coords[rows, c]
        # directions are (axis 0, -1), (axis 0, +1), (axis 1, -1), ...
        valid = np.empty((A, 2 * self.d), dtype=bool)
        valid[:, 0::2] = here > 0
        valid[:, 1::2] = here < self.n - 1
        count = valid.sum(axis=1)
        move &= count > 0
        r = np.floor(pick * np.maximum(count, 1)).astype(np.int64)
        choice = np.argmax(np.cumsum(valid, axis=1) > r[:, None], axis=1)
        axis, sign = choice // 2, np.where(choice % 2 == 1, 1, -1)
        moved = rows[move]
        self.coords[moved, c[moved], axis[moved]] += sign[moved]
        same = np.all(self.coords == self.coords[rows, c][:, None, :], axis=2)
        rr, k = np.nonzero(same)
        return rr, c[rr], k


class _AdjacentKernel(_Kernel):
    _arrays = ("deck",)

    def __init__(self, spec, replicas):
        super().__init__(spec, replicas)
        self.deck = np.tile(np.arange(self.n), (replicas, 1))

    def step(self, rng):
        A = len(self.deck)
        rows = np.arange(A)
        k = rng.integers(0, self.n - 1, A)
        swap = rng.integers(0, 2, A).astype(bool)
        a, b = self.deck[rows, k], self.deck[rows, k + 1]
        s = rows[swap]
        self.deck[s, k[swap]], self.deck[s, k[swap] + 1] = b[swap], a[swap]
        return rows, a, b


class _CycleKernel(_Kernel):
    _arrays = ("deck",)

    def __init__(self, spec, replicas):
        super().__init__(spec, replicas)
        self.deck = np.tile(np.arange(self.n), (replicas, 1))

    def step(self, rng):
        A = len(self.deck)
        gen = rng.integers(0, 3, A)
        top = gen != 1
        rows = np.arange(A)[top]
        a, b = self.deck[rows, 0], self.deck[rows, 1]
        cyc = gen == 1
        self.deck[cyc] = np.roll(self.deck[cyc], 1, axis=1)
        sw = gen == 2
        self.deck[sw, 0], self.deck[sw, 1] = self.deck[sw, 1], self.deck[sw, 0].copy()
        return rows, a, b


class _RandomToRandomKernel(_Kernel):
    _arrays = ("deck",)

    def __init__(self, spec, replicas):
        super().__init__(spec, replicas)
        self.deck = np.tile(np.arange(self.n), (replicas, 1))

    def step(self, rng):
        A = len(self.deck)
        rows = np.arange(A)
        c = rng.integers(0, self.n, A)
        s = rng.integers(0, self.n, A)
        p = np.argmax(self.deck == c[:, None], axis=1)
        q = np.arange(self.n)[None, :]
        without = np.where(q < s[:, None], q, q - 1)
        source = np.where(without < p[:, None], without, without + 1)
        source = np.clip(source, 0, self.n - 1)
        new = self.deck[rows[:, None], source]
        new[rows, s] = c
        self.deck = new
        below = s < self.n - 1
        r = rows[below]
        return r, c[r], new[r, s[r] + 1]


class _Wash1DLongKernel(_Kernel):
    _arrays = ("pos",)
    dense = True

    def __init__(self, spec, replicas):
        super().__init__(spec, replicas)
        self.p = float(spec.p)
        self.pos = np.tile(np.arange(self.n), (replicas, 1))

    def step(self, rng):
        A = len(self.pos)
        disp = rng.geometric(self.p, size=(2, A, self.n)) - 1
        mid = np.minimum(self.pos + disp[0], self.n - 1)
        end = np.maximum(mid - disp[1], 0)
        pos = self.pos
        right = (pos[:, :, None] < pos[:, None, :]) & (mid[:, :, None] >= mid[:, None, :])
        left = (mid[:, :, None] > mid[:, None, :]) & (end[:, :, None] <= end[:, None, :])
        events = right | left
        events |= np.swapaxes(events, 1, 2)
        events |= end[:, :, None] == end[:, None, :]
        self.pos = end
        return events


_KERNELS = {
    WASH1D: _Wash1DKernel,
    WASH_GRID: _WashGridKernel,
    WASH1D_LONG: _Wash1DLongKernel,
    ADJ_TRANSPOSITION: _AdjacentKernel,
    CYCLE_TRANSPOSITION: _CycleKernel,
    RANDOM_TO_RANDOM: _RandomToRandomKernel,
}


def first_interaction_matrix(spec: ProcessSpec, replicas, rng, t_max=None):
    """First interaction time of every pair in every replica, from the canonical start.

    Parameters
    ----------
    spec : ProcessSpec
        Any family with an interaction detector.
    replicas : int
        Number of independent replicas, all driven by `rng`.
    rng : np.random.Generator
        Single generator for the whole batch, normally `batch_rng(seed, experiment)`. The
        matrix is reproducible for a fixed generator and replica count; changing `replicas`
        changes every row.
    t_max : int, optional
        Step cap. Defaults to `default_t_max(spec)`. Replicas stop as soon as every pair
        has interacted.

    Returns
    -------
    np.ndarray
        Shape (replicas, n, n), symmetric, 0 on the diagonal, `np.inf` for pairs that had
        not interacted by `t_max`.
    """
    kernel_cls = _KERNELS.get(spec.family)
    if kernel_cls is None:
        raise ShuffleValidationError(f"{spec.family} has no interaction detector")
    if replicas < 1:
        raise ShuffleValidationError(f"Need at least one replica, got {replicas}")
    t_max = default_t_max(spec) if t_max is None else int(t_max)
    n = spec.n
    n_pairs = n * (n - 1) // 2
    kernel = kernel_cls(spec, replicas)

    out = np.full((replicas, n, n), np.inf)
    out[:, np.arange(n), np.arange(n)] = 0
    first = out.copy()
    covered = np.zeros(replicas, dtype=np.int64)
    ids = np.arange(replicas)
    t = 0
    while len(ids) and t < t_max and n_pairs:
        t += 1
        if kernel.dense:
            mask = kernel.step(rng) & np.isinf(first)
            first[mask] = t
            covered += mask.sum(axis=(1, 2)) // 2
        else:
            rows, a, b = kernel.step(rng)
            fresh = np.isinf(first[rows, a, b])
            rows, a, b = rows[fresh], a[fresh], b[fresh]
            first[rows, a, b] = t
            first[rows, b, a] = t
            covered += np.bincount(rows, minlength=len(ids))
        done = covered >= n_pairs
        if done.any():
            out[ids[done]] = first[done]
            keep = ~done
            ids, first, covered = ids[keep], first[keep], covered[keep]
            kernel.keep(keep)
    if len(ids) and n_pairs:
        out[ids] = first
        logger.warning(
            f"{len(ids)} of {replicas} replicas of {spec!r} had uncovered pairs at t_max={t_max}"
        )
    return out


def pair_times(matrix):
    """Upper-triangle pair times, shape (replicas, C(n,2)), pairs in lexicographic order."""
    n = matrix.shape[1]
    iu = np.triu_indices(n, k=1)
    return matrix[:, iu[0], iu[1]]


def all_pairs_times(matrix):
    """All-pairs stopping time per replica (inf when some pair never interacted)."""
    times = pair_times(matrix)
    if times.shape[1] == 0:
        return np.zeros(len(matrix))
    return times.max(axis=1)
