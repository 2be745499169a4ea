"""The acceptance suite: every exact claim checked exactly, every order checked by a fit."""
import collections
import logging
import os
import time
from fractions import Fraction

import pandas as pd

from .. import mixing, mutation, stopping
from ..errors import CriterionFailure, EmptyConditionError
from ..perm import (
    Permutation,
    TranspositionSequence,
    all_permutations,
    all_transpositions,
    cayley_length,
    compose,
    evaluate_subsequence,
    greedy_subsequence_factor,
    spanning_experiment,
)
from ..processes import (
    ADJ_TRANSPOSITION,
    CYCLE_TRANSPOSITION,
    FAMILIES,
    RANDOM_TO_RANDOM,
    WASH1D,
    WASH1D_LONG,
    WASH_GRID,
    ProcessSpec,
)
from ..processes.exact import check_event_soundness, check_fair, check_piles_jumbled, evolve
from ..processes.paths import process_for
from ..utils.seeding import DEFAULT_SEED, replica_rng
from .manifest import RunMetadata, write_output

logger = logging.getLogger(__name__)

SCALING_BRACKETS = {
    WASH1D: (2.6, 3.4),
    ADJ_TRANSPOSITION: (2.6, 3.4),
    RANDOM_TO_RANDOM: (1.6, 2.4),
    WASH_GRID: (2.6, 3.4),
}
COMBININGLOG_BAND = 4.0


def _cayley_bfs(n):
    start = Permutation.identity(n)
    gens = [t.as_permutation(n) for t in all_transpositions(n)]
    dist = {start: 0}
    queue = collections.deque([start])
    while queue:
        p = queue.popleft()
        for g in gens:
            q = compose(p, g)
            if q not in dist:
                dist[q] = dist[p] + 1
                queue.append(q)
    return dist


class Suite(object):
    def __init__(self, out_dir, seed=DEFAULT_SEED, quick=False):
        self.out_dir = out_dir
        self.seed = seed
        self.quick = quick

    def _write(self, name, data):
        return write_output(os.path.join(self.out_dir, name), data, "csv")

    def cayley_length_formula(self):
        for n in range(1, (5 if self.quick else 6) + 1):
            dist = _cayley_bfs(n)
            bad = [p for p in all_permutations(n) if cayley_length(p) != dist[p]]
            if bad:
                return False, f"n={n}: {len(bad)} mismatches, first {bad[0]}"
        return True, "cayley_length == BFS distance"

    def greedy_completeness(self):
        orderings = 10 if self.quick else 100
        for n in range(2, (4 if self.quick else 5) + 1):
            perms = all_permutations(n)
            for k in range(orderings):
                seq = TranspositionSequence.all_distinct(n, replica_rng(self.seed, n, k))
                for pi in perms:
                    if evaluate_subsequence(seq, greedy_subsequence_factor(seq, pi)) != pi:
                        return False, f"n={n}, ordering {k}, pi={pi}"
        return True, f"{orderings} orderings per n"

    def counterexample(self):
        result = mutation.conditioned_distribution(ProcessSpec(WASH1D, 3), 3, 3, stopping.ALL_PAIRS)
        self._write("counterexample", result.to_json())
        probs = [result.distribution.get(p, 0) for p in all_permutations(3)]
        return max(probs) > min(probs), f"max {max(probs)} vs min {min(probs)}"

    def ijswap(self):
        cases = [(3, t) for t in range(0, (3 if self.quick else 4) + 1)]
        cases += [(2, t) for t in range(0, (4 if self.quick else 6) + 1)]
        for n, t in cases:
            for pair in all_transpositions(n):
                report = mutation.verify_ijswap_bijection(ProcessSpec(WASH1D, n), n, t, pair.i, pair.j)
                if not report.holds:
                    return False, f"n={n}, t={t}, {pair}: discrepancy {report.max_discrepancy}"
        return True, f"{len(cases)} (n, t) cases"

    def mutation_bound(self):
        frames = []
        for family, t_max in ((WASH1D, 8), (CYCLE_TRANSPOSITION, 12)):
            report = mixing.verify_mutation_bound(ProcessSpec(family, 3), 3, range(0, t_max + 1))
            frame = report.to_frame()
            frame.insert(0, "family", family)
            frames.append(frame)
            if not report.holds:
                self._write("mutation_bound", pd.concat(frames))
                return False, f"{family}: sep(t) > P(T > t) somewhere"
        self._write("mutation_bound", pd.concat(frames))
        return True, "sep(t) <= P(T > t) on every grid point"

    def _smallest_slow_t(self, spec, t_max=8):
        for t in range(0, t_max + 1):
            try:
                mutation.conditioned_distribution(spec, spec.n, t, stopping.SEQUENTIAL)
            except EmptyConditionError:
                continue
            return t
        return None

    def mutation_maps(self):
        rows = []
        # shortest horizons where the all-pairs rule can hold, one step more outside quick mode
        for family, t_fast in ((WASH1D, 3), (CYCLE_TRANSPOSITION, 5)):
            t_fast += 0 if self.quick else 1
            spec = ProcessSpec(family, 3)
            rows.append(dict(family=family, rule=mutation.FAST, t=t_fast,
                             **mutation.verify_mutation_maps(spec, 3, t_fast, mutation.FAST)))
            t_slow = self._smallest_slow_t(spec)
            if t_slow is not None:
                rows.append(dict(family=family, rule=mutation.SLOW, t=t_slow,
                                 **mutation.verify_mutation_maps(spec, 3, t_slow, mutation.SLOW)))
        frame = pd.DataFrame(rows)
        self._write("mutation_maps", frame)
        failures = [c for c in frame.columns if c.endswith(("_failures", "_mismatch"))]
        bad = int(frame[failures].to_numpy().sum())
        return bad == 0, f"{bad} failures over {int(frame['paths_satisfying'].sum())} satisfying paths"

    def fairness(self):
        unfair = [f for f in FAMILIES if not check_fair(ProcessSpec(f, 3)).fair]
        return not unfair, "unfair: " + ", ".join(unfair) if unfair else "all families fair at n=3"

    def detector_soundness(self):
        total = 0
        for family in FAMILIES:
            spec = ProcessSpec(family, 3)
            if not process_for(spec).has_detector:
                continue
            report = check_event_soundness(spec)
            total += report.events_checked
            if not report.sound:
                return False, f"{family}: {len(report.violations)} violations"
        return True, f"{total} events validated"

    def wash_jumble(self):
        gsr = process_for(ProcessSpec(WASH1D_LONG, 3, merge="gsr"))
        insertion = process_for(ProcessSpec(WASH1D_LONG, 3, merge="insertion"))
        start = {gsr.canonical_start(): Fraction(1)}
        by_gsr, by_insertion = start, dict(start)
        for t in range(1, 3):
            by_gsr, by_insertion = evolve(gsr, by_gsr), evolve(insertion, by_insertion)
            if by_gsr != by_insertion:
                return False, f"merge rules disagree on states at t={t}"
        for process in (gsr, insertion, process_for(ProcessSpec(WASH1D, 3))):
            dist = {process.canonical_start(): Fraction(1)}
            for t in range(1, 3):
                dist = evolve(process, dist)
                if not check_piles_jumbled(dist):
                    return False, f"{process.spec!r}: a pile is not jumbled at t={t}"
        return True, "merge rules agree on states and piles are jumbled"

    def scaling_orders(self):
        n_list = (4, 8, 16) if self.quick else (8, 16, 32, 64)
        replicas = 200 if self.quick else 1000
        rows = []
        ok = True
        for family, (lo, hi) in SCALING_BRACKETS.items():
            series = mixing.scaling_experiment(ProcessSpec(family, n_list[0]), n_list, replicas, self.seed)
            fit = mixing.scaling_fit(series)
            inside = lo <= fit.exponent <= hi
            ok &= inside
            rows.append(dict(family=family, lo=lo, hi=hi, inside=inside, **fit.to_json()))
        self._write("scaling", pd.DataFrame(rows))
        if self.quick:
            return None, "brackets not enforced in quick mode"
        return ok, "; ".join(f"{r['family']}: {r['exponent']:.2f}" for r in rows)

    def combininglog(self):
        n_list = (4, 8, 16) if self.quick else (8, 16, 32, 64)
        report = stopping.combininglog_report(ProcessSpec(WASH1D, n_list[0]), n_list, 200 if self.quick else 1000, self.seed)
        self._write("combininglog", report)
        ratios = report["ratio"]
        spread = float(ratios.max() / ratios.min())
        return spread <= COMBININGLOG_BAND, f"ratio spread {spread:.2f}"

    def spanning(self):
        seeds = 200 if self.quick else 10_000
        frame = spanning_experiment([4, 5], seeds, self.seed)
        self._write("spanning", frame)
        return len(frame) == 2 * seeds, f"{len(frame)} trials"

    CRITERIA = (
        "cayley_length_formula",
        "greedy_completeness",
        "counterexample",
        "ijswap",
        "mutation_bound",
        "mutation_maps",
        "fairness",
        "detector_soundness",
        "wash_jumble",
        "scaling_orders",
        "combininglog",
        "spanning",
    )


def paper_suite(out_dir, seed=DEFAULT_SEED, quick=False, only=None) -> RunMetadata:
    """Runs the acceptance criteria, writes suite.csv and run_metadata.json.

    Raises
    ------
    CriterionFailure
        When any criterion fails; the table and metadata are written first.
    """
    os.makedirs(out_dir, exist_ok=True)
    suite = Suite(out_dir, seed, quick)
    names = [c for c in Suite.CRITERIA if only is None or c in only]
    meta = RunMetadata(None, seed, len(names))
    rows = []
    for k, name in enumerate(names):
        started = time.perf_counter()
        passed, detail = getattr(suite, name)()
        status = "skipped" if passed is None else ("pass" if passed else "fail")
        seconds = round(time.perf_counter() - started, 3)
        rows.append({"criterion": name, "status": status, "detail": detail, "seconds": seconds})
        with meta.txn() as s:
            s["experiments"][k] = {"status": "ok" if passed is not False else "failed", "criterion": name}
        logger.info(f"{name}: {status} ({detail})")
    table = pd.DataFrame(rows, columns=["criterion", "status", "detail", "seconds"])
    print(table[["criterion", "status", "detail"]].to_string(index=False))
    write_output(os.path.join(out_dir, "suite"), table.drop(columns="seconds"), "csv")
    meta.write(out_dir)
    failed = table[table["status"] == "fail"]["criterion"].tolist()
    if failed:
        raise CriterionFailure(f"Failed criteria: {', '.join(failed)}")
    return meta
