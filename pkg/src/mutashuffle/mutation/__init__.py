from .maps import (
    RelabelAction,
    MutationPlan,
    relabel_suffix,
    apply_plan,
    plan_fast,
    plan_slow,
    mutate_fast,
    mutate_fast_inverse,
    mutate_slow,
    mutate_slow_inverse,
)
from .verify import (
    FAST,
    SLOW,
    verify_ijswap_bijection,
    conditioned_distribution,
    verify_mutation_maps,
    verify_random_to_top_uniform,
)
