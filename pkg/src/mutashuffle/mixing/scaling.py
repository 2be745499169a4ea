"""Log-log fits of stopping-time statistics against the deck size."""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from ..errors import ShuffleValidationError
from ..processes import ProcessSpec
from ..processes.batch import all_pairs_times, first_interaction_matrix, pair_times
from ..utils.seeding import DEFAULT_SEED, batch_rng

logger = logging.getLogger(__name__)

PAIR_MEAN = "pair_mean"
ALL_PAIRS_MEDIAN = "all_pairs_median"
ALL_PAIRS_MEAN = "all_pairs_mean"
STATISTICS = (PAIR_MEAN, ALL_PAIRS_MEDIAN, ALL_PAIRS_MEAN)
MIN_FIT_POINTS = 3
DEFAULT_N_LIST = (8, 16, 32, 64)


@dataclass
class ScalingSeries:
    """Points (n, statistic, stderr) with n strictly increasing and statistic > 0."""

    statistic: str
    points: List[Tuple[int, float, float]] = field(default_factory=list)

    def __post_init__(self):
        ns = [p[0] for p in self.points]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ShuffleValidationError(f"Deck sizes must be strictly increasing, got {ns}")
        if any(p[1] <= 0 for p in self.points):
            raise ShuffleValidationError("Scaling statistics must be positive")

    def to_frame(self):
        return pd.DataFrame(self.points, columns=["n", "stat", "stderr"])


@dataclass
class ScalingFit:
    exponent: float
    stderr: float
    r2: float
    corrected_exponent: float
    corrected_stderr: float

    def to_json(self):
        return {
            "exponent": self.exponent,
            "stderr": self.stderr,
            "r2": self.r2,
            "corrected_exponent": self.corrected_exponent,
            "corrected_stderr": self.corrected_stderr,
        }


def scaling_fit(series: ScalingSeries) -> ScalingFit:
    """Slope of log(statistic) against log(n), raw and with the statistic divided by log n."""
    if len(series.points) < MIN_FIT_POINTS:
        raise ShuffleValidationError(
            f"A scaling fit needs at least {MIN_FIT_POINTS} points, got {len(series.points)}"
        )
    ns = np.array([p[0] for p in series.points], dtype=float)
    ys = np.array([p[1] for p in series.points], dtype=float)
    if ns.min() < 2:
        raise ShuffleValidationError("The log-corrected fit needs n >= 2")
    raw = stats.linregress(np.log(ns), np.log(ys))
    corrected = stats.linregress(np.log(ns), np.log(ys / np.log(ns)))
    return ScalingFit(
        exponent=float(raw.slope),
        stderr=float(raw.stderr),
        r2=float(raw.rvalue**2),
        corrected_exponent=float(corrected.slope),
        corrected_stderr=float(corrected.stderr),
    )


def _statistic(matrix, statistic):
    if statistic == PAIR_MEAN:
        per_replica = pair_times(matrix).mean(axis=1)
        return float(per_replica.mean()), float(per_replica.std(ddof=1) / math.sqrt(len(per_replica)))
    values = all_pairs_times(matrix)
    spread = float(values.std(ddof=1) / math.sqrt(len(values)))
    if statistic == ALL_PAIRS_MEAN:
        return float(values.mean()), spread
    # asymptotic standard error of a median
    return float(np.median(values)), math.sqrt(math.pi / 2) * spread


def scaling_experiment(spec_factory, n_list=DEFAULT_N_LIST, replicas=1000, seed=DEFAULT_SEED, statistic=PAIR_MEAN):
    """Monte Carlo statistic of the first-interaction times over a range of deck sizes.

    Parameters
    ----------
    spec_factory : ProcessSpec or callable
        A spec (resized with `with_n`) or a function of n returning one.
    n_list : list of int
        Deck sizes, strictly increasing.
    statistic : str
        One of `STATISTICS`.

    Returns
    -------
    ScalingSeries
    """
    if statistic not in STATISTICS:
        raise ShuffleValidationError(f"Unknown statistic {statistic}. Must be one of {', '.join(STATISTICS)}")
    if replicas < 2:
        raise ShuffleValidationError("Standard errors need at least two replicas")
    points = []
    for index, n in enumerate(n_list):
        spec = spec_factory.with_n(n) if isinstance(spec_factory, ProcessSpec) else spec_factory(n)
        matrix = first_interaction_matrix(spec, replicas, batch_rng(seed, index))
        value, err = _statistic(matrix, statistic)
        logger.info(f"{statistic} for {spec!r}: {value:.1f} +/- {err:.1f}")
        points.append((n, value, err))
    return ScalingSeries(statistic, points)
