"""Counter-based seed derivation.

Every stochastic quantity draws from a generator keyed by (global seed, experiment index,
replica index). Generators never share state, so replicas can be run in any order or in
parallel and still reproduce bit for bit.

The vectorised first-interaction simulator is the one exception: a batch of replicas is the
unit of work and draws from a single `batch_rng` keyed by (global seed, experiment index,
tag). Its output is reproducible for a fixed (seed, experiment, replica count), but replica r
of a batch of R is not replica r of a batch of R' != R. Anything that must be stable per
replica (sequential stopping times, simulate, the spanning experiment) uses `replica_rng`.
"""
import numpy as np

DEFAULT_SEED = 20240529


def experiment_seed(seed, experiment=0):
    return np.random.SeedSequence([int(seed), int(experiment)])


def replica_rng(seed, experiment=0, replica=0):
    """Generator for one replica of one experiment."""
    return np.random.default_rng([int(seed), int(experiment), int(replica)])


def batch_rng(seed, experiment=0, tag=0):
    """Generator shared by a vectorised batch of replicas (the batch is the unit of work).

    The tag is offset by 2**31 so batch streams never coincide with a `replica_rng` stream.
    """
    return np.random.default_rng([int(seed), int(experiment), 2**31 + int(tag)])
