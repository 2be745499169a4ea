"""Monte Carlo estimates of mutation-time tails and of the pair/all-pairs time ratio."""
import logging
import math
from typing import NamedTuple

import numpy as np
import pandas as pd

from ..errors import ShuffleValidationError
from ..processes import InteractionEvent, ProcessSpec
from ..processes.batch import all_pairs_times, first_interaction_matrix, pair_times
from ..processes.paths import process_for
from ..perm import all_transpositions
from ..utils.seeding import DEFAULT_SEED, batch_rng, replica_rng
from .rules import ALL_PAIRS, StoppingRule, first_interaction_times

logger = logging.getLogger(__name__)

DEFAULT_REPLICAS = 1000
DEFAULT_Z = 1.96
DEFAULT_T_GRID = (0, 1, 2, 5, 10, 20, 50, 100)
DEFAULT_SYNTHETIC_SCALE = 1000.0
LOG_NOTE = "ratio = all_pairs_median / (pair_mean_time * log k); log k is replaced by log k + 1 when k = 1"


class TailEstimate(NamedTuple):
    estimate: float
    ci_lo: float
    ci_hi: float
    exceed: int
    replicas: int


def wilson_interval(k, n, z=DEFAULT_Z):
    """Wilson score interval for k successes in n trials."""
    if n <= 0:
        raise ShuffleValidationError(f"Need at least one trial, got {n}")
    phat = k / n
    denom = 1 + z**2 / n
    centre = (phat + z**2 / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z**2 / (4 * n**2)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def sample_trace(spec: ProcessSpec, steps, rng):
    """Interaction events of one reference-stepper run of `steps` steps from the canonical start."""
    process = process_for(spec)
    if not process.has_detector:
        raise ShuffleValidationError(f"{spec.family} has no interaction detector")
    state = process.canonical_start()
    trace = []
    for t in range(1, steps + 1):
        _, state, events = process.sample_step(state, rng, time=t)
        trace.extend(events)
    return trace


def sample_stopping_times(spec: ProcessSpec, rule, replicas, seed=DEFAULT_SEED, t_max=None, experiment=0):
    """Stopping time of each replica, `np.inf` where it exceeds `t_max`.

    All-pairs times come from the vectorised batch simulator. Sequential times need whole
    traces and run on the reference stepper, one generator per replica.
    """
    rule = StoppingRule.of(rule)
    if replicas < 1:
        raise ShuffleValidationError(f"Need at least one replica, got {replicas}")
    if rule.kind == ALL_PAIRS:
        matrix = first_interaction_matrix(spec, replicas, batch_rng(seed, experiment), t_max=t_max)
        return all_pairs_times(matrix)
    if t_max is None:
        raise ShuffleValidationError("Sequential stopping times need an explicit t_max")
    out = np.full(replicas, np.inf)
    for r in range(replicas):
        report = rule.evaluate(sample_trace(spec, t_max, replica_rng(seed, experiment, r)), spec.n)
        if report.achieved:
            out[r] = report.time
    return out


def tail_estimate(spec: ProcessSpec, rule, t, replicas=DEFAULT_REPLICAS, seed=DEFAULT_SEED):
    """Fraction of replicas with T > t, with its Wilson 95% interval."""
    times = sample_stopping_times(spec, rule, replicas, seed, t_max=t)
    exceed = int(np.sum(times > t))
    lo, hi = wilson_interval(exceed, replicas)
    return TailEstimate(exceed / replicas, lo, hi, exceed, replicas)


def tail_curve(spec: ProcessSpec, rule, t_grid=DEFAULT_T_GRID, replicas=DEFAULT_REPLICAS, seed=DEFAULT_SEED):
    """P(T > t) over a grid of t from one set of replicas.

    Returns
    -------
    pd.DataFrame
        Columns ``n, t, estimate, ci_lo, ci_hi``.
    """
    t_grid = sorted(int(t) for t in t_grid)
    times = sample_stopping_times(spec, rule, replicas, seed, t_max=t_grid[-1])
    rows = []
    for t in t_grid:
        exceed = int(np.sum(times > t))
        lo, hi = wilson_interval(exceed, replicas)
        rows.append({"n": spec.n, "t": t, "estimate": exceed / replicas, "ci_lo": lo, "ci_hi": hi})
    logger.info(f"Tail curve of {spec!r} under {StoppingRule.of(rule)} over {replicas} replicas")
    return pd.DataFrame(rows, columns=["n", "t", "estimate", "ci_lo", "ci_hi"])


def log_pairs(k):
    return math.log(k) + 1 if k == 1 else math.log(k)


def combininglog_row(n, times):
    """Summary of a (replicas, C(n,2)) array of per-pair first interaction times."""
    times = np.asarray(times, dtype=float)
    k = n * (n - 1) // 2
    if k == 0:
        raise ShuffleValidationError("The pair-time ratio needs at least two cards")
    finite = np.isfinite(times)
    if not finite.all():
        logger.warning(f"n={n}: {int((~finite).sum())} pair times were censored")
    pair_mean = float(times[finite].mean()) if finite.any() else math.inf
    median = float(np.median(times.max(axis=1)))
    return {
        "n": n,
        "pairs": k,
        "pair_mean_time": pair_mean,
        "all_pairs_median": median,
        "ratio": median / (pair_mean * log_pairs(k)),
    }


def combininglog_report(spec: ProcessSpec, n_list, replicas=DEFAULT_REPLICAS, seed=DEFAULT_SEED):
    """Mean pair time, median all-pairs time and their log-corrected ratio per deck size.

    Returns
    -------
    pd.DataFrame
        Columns ``n, pairs, pair_mean_time, all_pairs_median, ratio``. ``attrs["note"]``
        documents the k = 1 convention.
    """
    rows = []
    for index, n in enumerate(n_list):
        matrix = first_interaction_matrix(spec.with_n(n), replicas, batch_rng(seed, index))
        rows.append(combininglog_row(n, pair_times(matrix)))
    df = pd.DataFrame(rows, columns=["n", "pairs", "pair_mean_time", "all_pairs_median", "ratio"])
    df.attrs["note"] = LOG_NOTE
    return df


def synthetic_pair_trace(n, rng, scale=DEFAULT_SYNTHETIC_SCALE):
    """One event per pair at an i.i.d. exponential time (rounded up to a whole step)."""
    trace = []
    for pair in all_transpositions(n):
        t = int(math.ceil(rng.exponential(scale)))
        trace.append(InteractionEvent(max(t, 1), pair, "synthetic"))
    return sorted(trace)


def trace_pair_times(trace, n):
    """Per-pair first times of a trace in lexicographic pair order, `np.inf` for absent pairs."""
    first = first_interaction_times(trace, n)
    return np.array([first.get(p, math.inf) for p in all_transpositions(n)], dtype=float)


def synthetic_combininglog(n_list, replicas=DEFAULT_REPLICAS, seed=DEFAULT_SEED, scale=DEFAULT_SYNTHETIC_SCALE):
    """Calibration table from exponential pair times; ratios should sit near 1 for large n."""
    rows = []
    for index, n in enumerate(n_list):
        times = [
            trace_pair_times(synthetic_pair_trace(n, replica_rng(seed, index, r), scale), n)
            for r in range(replicas)
        ]
        rows.append(combininglog_row(n, np.vstack(times)))
    df = pd.DataFrame(rows, columns=["n", "pairs", "pair_mean_time", "all_pairs_median", "ratio"])
    df.attrs["note"] = LOG_NOTE
    return df
