from .matrix import InteractionMatrix, track
from .rules import (
    ALL_PAIRS,
    SEQUENTIAL,
    StoppingRule,
    StoppingReport,
    all_pairs_time,
    sequential_times,
    first_interaction_times,
    stopping_time,
)
from .estimates import (
    wilson_interval,
    tail_estimate,
    tail_curve,
    combininglog_report,
    synthetic_pair_trace,
    synthetic_combininglog,
)
