from .exact import (
    ExactDistribution,
    MutationBoundReport,
    exact_distribution,
    distribution_by_paths,
    distance_curve,
    separation_distance,
    total_variation,
    mixing_time,
    verify_mutation_bound,
)
from .scaling import ScalingSeries, ScalingFit, scaling_fit, scaling_experiment
