from .base import (
    Permutation,
    Transposition,
    CycleDecomposition,
    compose,
    invert,
    cycles,
    cayley_length,
    length_decreases,
    act_on_labels,
    all_permutations,
    all_transpositions,
)
from .factorization import (
    StarVector,
    TranspositionSequence,
    SubsequenceMask,
    star_factor,
    evaluate_star,
    greedy_subsequence_factor,
    greedy_walk,
    evaluate_subsequence,
    reachable_set,
    min_spanning_prefix,
    spanning_experiment,
)
