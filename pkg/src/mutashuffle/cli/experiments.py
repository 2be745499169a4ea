"""One function per subcommand. Each takes the experiment's parameters and returns its outputs.

An output is ``(suffix, data)``: `data` is a DataFrame (written as CSV or JSON records) or a
JSON-able object; `suffix` is appended to the experiment's output stem ("" for the main one).
"""
import logging
import numbers
from fractions import Fraction

import pandas as pd

from .. import mixing, mutation, stopping
from ..errors import ShuffleValidationError
from ..perm import (
    Permutation,
    TranspositionSequence,
    cayley_length,
    cycles,
    greedy_subsequence_factor,
    star_factor,
    spanning_experiment,
)
from ..processes import FAMILIES, ProcessSpec, RANDOM_TO_TOP, WASH1D
from ..processes.exact import check_exact_guard
from ..processes.paths import process_for
from ..stopping.rules import RULE_KINDS
from ..utils.seeding import DEFAULT_SEED, replica_rng

logger = logging.getLogger(__name__)

DEFAULT_REPLICAS = 1000
DEFAULT_SIMULATE_STEPS = 10
DEFAULT_STOPPING_GRID = (0, 10, 20, 50, 100, 200, 500, 1000)
DEFAULT_EXACT_GRID = tuple(range(0, 9))
STOCHASTIC = ("simulate", "stopping", "scaling", "spanning")
WITH_PROCESS = ("simulate", "stopping", "mixing-exact", "scaling", "mutate-verify", "counterexample")
EXACT = ("mixing-exact", "mutate-verify", "counterexample")
COUNTEREXAMPLE_DEFAULTS = {"family": WASH1D, "n": 3}


def spec_from(params):
    if params.get("family") not in FAMILIES:
        raise ShuffleValidationError(f"Unknown family {params.get('family')}")
    n = params.get("n")
    if n is None:
        n_list = params.get("n_list") or [None]
        n = n_list[0]
    if n is None:
        raise ShuffleValidationError("An experiment needs n or n_list")
    return ProcessSpec(params["family"], n, **dict(params.get("params") or {}))


def _exact(value):
    return float(value) if isinstance(value, Fraction) else value


def _float_frame(rows, columns):
    return pd.DataFrame([{k: _exact(v) for k, v in row.items()} for row in rows], columns=columns)


def run_simulate(params):
    """Samples `replicas` independent paths, logging every event and the deck after every step."""
    spec = spec_from(params)
    seed = params.get("seed", DEFAULT_SEED)
    steps = int(params.get("t", params.get("t_max", DEFAULT_SIMULATE_STEPS)))
    replicas = int(params.get("replicas", 1))
    process = process_for(spec)
    events, trajectory = [], []
    for r in range(replicas):
        rng = replica_rng(seed, params.get("index", 0), r)
        state = process.canonical_start()
        trajectory.append({"replica": r, "t": 0, "permutation": str(process.project(state))})
        for t in range(1, steps + 1):
            _, state, step_events = process.sample_step(state, rng, time=t)
            events.extend({"replica": r, "t": t, "event_pair": str(ev.pair), "event_kind": ev.kind}
                          for ev in step_events)
            trajectory.append({"replica": r, "t": t, "permutation": str(process.project(state))})
    return [
        ("_events", pd.DataFrame(events, columns=["replica", "t", "event_pair", "event_kind"])),
        ("_trajectory", pd.DataFrame(trajectory, columns=["replica", "t", "permutation"])),
    ]


def run_stopping(params):
    spec = spec_from(params)
    seed = params.get("seed", DEFAULT_SEED)
    replicas = int(params.get("replicas", DEFAULT_REPLICAS))
    rule = params.get("rule", stopping.ALL_PAIRS)
    n_list = params.get("n_list") or [spec.n]
    grid = params.get("t_grid", DEFAULT_STOPPING_GRID)
    curves = [stopping.tail_curve(spec.with_n(n), rule, grid, replicas, seed) for n in n_list]
    outputs = [("", pd.concat(curves, ignore_index=True))]
    if all(n >= 2 for n in n_list):
        report = stopping.combininglog_report(spec, n_list, replicas, seed)
        outputs.append(("_combininglog", report[["n", "pair_mean_time", "all_pairs_median", "ratio"]]))
    return outputs


def run_mixing_exact(params):
    spec = spec_from(params)
    grid = params.get("t_grid", DEFAULT_EXACT_GRID)
    if spec.family == RANDOM_TO_TOP:
        rows = [dict(row, p_T_gt_t=None) for row in mixing.distance_curve(spec, spec.n, grid)]
    else:
        rows = mixing.verify_mutation_bound(spec, spec.n, grid, params.get("rule", stopping.ALL_PAIRS)).rows
    return [("", _float_frame(rows, ["t", "sep", "tv", "p_T_gt_t"]))]


def run_scaling(params):
    spec = spec_from(params)
    series = mixing.scaling_experiment(
        spec,
        params.get("n_list") or [spec.n],
        int(params.get("replicas", DEFAULT_REPLICAS)),
        params.get("seed", DEFAULT_SEED),
        params.get("statistic", mixing.scaling.PAIR_MEAN),
    )
    outputs = [("", series.to_frame())]
    if len(series.points) >= mixing.scaling.MIN_FIT_POINTS:
        outputs.append(("_fit", mixing.scaling_fit(series).to_json()))
    return outputs


def run_mutate_verify(params):
    spec = spec_from(params)
    report = mutation.verify_mutation_maps(spec, spec.n, int(params.get("t", 3)), params.get("rule", mutation.FAST))
    return [("", report)]


def run_counterexample(params):
    params = dict(COUNTEREXAMPLE_DEFAULTS, **params)
    spec = spec_from(params)
    result = mutation.conditioned_distribution(spec, spec.n, int(params.get("t", 3)), stopping.ALL_PAIRS)
    return [("", result.to_json())]


def _permutation(params):
    if "permutation" not in params:
        raise ShuffleValidationError("factorize needs a permutation, e.g. [2,3,1]")
    value = params["permutation"]
    return Permutation.from_text(value) if isinstance(value, str) else Permutation(value)


def _sequence(n, pairs):
    return TranspositionSequence(n, tuple(tuple(p) for p in pairs))


def run_factorize(params):
    pi = _permutation(params)
    out = {
        "permutation": pi,
        "cycles": str(cycles(pi)),
        "cayley_length": cayley_length(pi),
        "star": star_factor(pi),
    }
    if params.get("sequence"):
        out["greedy_mask"] = greedy_subsequence_factor(_sequence(pi.n, params["sequence"]), pi)
    return [("", out)]


def run_spanning(params):
    n_list = params.get("n_list") or [params.get("n", 4)]
    seeds = params.get("seeds", 10_000)
    seeds = seeds if isinstance(seeds, int) else [int(s) for s in seeds]
    frame = spanning_experiment(n_list, seeds, params.get("seed", DEFAULT_SEED))
    return [("", frame)]


EXPERIMENTS = {
    "simulate": run_simulate,
    "stopping": run_stopping,
    "mixing-exact": run_mixing_exact,
    "scaling": run_scaling,
    "mutate-verify": run_mutate_verify,
    "counterexample": run_counterexample,
    "factorize": run_factorize,
    "spanning": run_spanning,
}


def _int_param(key, value, minimum=0):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < minimum:
        raise ShuffleValidationError(f"{key} must be an integer >= {minimum}, got {value!r}")


def check_params(sub, params):
    """Validates one experiment's parameters without running it.

    Builds every process the experiment would use, so bad families, deck sizes and family
    parameters surface before any output is written.
    """
    if sub == "counterexample":
        params = dict(COUNTEREXAMPLE_DEFAULTS, **params)
    for key in ("t", "t_max"):
        if params.get(key) is not None:
            _int_param(key, params[key])
    seeds = params.get("seeds")
    if seeds is not None:
        for s in seeds if isinstance(seeds, (list, tuple)) else [seeds]:
            _int_param("seeds", s)
    if params.get("replicas") is not None:
        _int_param("replicas", params["replicas"], 2 if sub == "scaling" else 1)
    for t in params.get("t_grid") or ():
        _int_param("t_grid", t)
    for n in ([params["n"]] if params.get("n") is not None else []) + list(params.get("n_list") or ()):
        _int_param("n", n, 1)
    if sub in WITH_PROCESS:
        spec = spec_from(params)
        for n in params.get("n_list") or [spec.n]:
            process_for(spec.with_n(n))
        if sub in EXACT:
            check_exact_guard(spec)
        rules = (mutation.FAST, mutation.SLOW) if sub == "mutate-verify" else RULE_KINDS
        if params.get("rule") is not None and params["rule"] not in rules:
            raise ShuffleValidationError(f"Unknown rule {params['rule']}. Must be one of {', '.join(rules)}")
        view = process_for(spec, view=True)
        needs_detector = sub != "simulate" and not (sub == "mixing-exact" and spec.family == RANDOM_TO_TOP)
        if needs_detector and not view.has_detector:
            raise ShuffleValidationError(f"{spec.family} has no interaction detector")
        if sub == "mutate-verify" and not view.relabel_equivariant:
            raise ShuffleValidationError(f"Mutation maps are unavailable for {spec.family}")
    if sub == "scaling" and params.get("statistic", mixing.scaling.PAIR_MEAN) not in mixing.scaling.STATISTICS:
        raise ShuffleValidationError(f"Unknown statistic {params['statistic']}")
    if sub == "factorize":
        pi = _permutation(params)
        if params.get("sequence"):
            _sequence(pi.n, params["sequence"])
    if sub == "spanning":
        for n in params.get("n_list") or [params.get("n", 4)]:
            _int_param("n", n, 2)
