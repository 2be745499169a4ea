"""Command line entry point: ``mutashuffle <subcommand> [options]``."""
import argparse
import logging
import os
import sys

from ..errors import ContractViolation, CriterionFailure, ShuffleValidationError
from ..processes import FAMILIES
from ..utils.json_utils import decode_json
from ..utils.seeding import DEFAULT_SEED
from .manifest import ExperimentManifest, run_manifest
from .suite import paper_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CRITERION = 2
EXIT_CONTRACT = 3

# subcommands whose result is also written to stdout
PRINTED = ("counterexample", "factorize")


def _int_list(text):
    return [int(x) for x in text.replace(",", " ").split()]


def _common(parser):
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED, help="global seed")
    parser.add_argument("--out", default="results", help="output directory")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--workers", type=int, default=1, help="size of the experiment pool")
    parser.add_argument("-v", "--verbose", action="count", default=0)


def _process(parser, n_list=False):
    parser.add_argument("--family", choices=FAMILIES, required=True)
    if n_list:
        parser.add_argument("--n-list", type=_int_list, required=True, help="e.g. 8,16,32,64")
    else:
        parser.add_argument("-n", type=int, required=True)
    parser.add_argument("--p", help="geometric parameter of wash1d-long, e.g. 1/2")
    parser.add_argument("--d", type=int, help="dimension of wash-grid")
    parser.add_argument("--merge", choices=("gsr", "insertion"), help="pile merge of wash1d-long")


def build_parser():
    parser = argparse.ArgumentParser(prog="mutashuffle", description=__doc__)
    parser.add_argument("--manifest", help="JSON experiment manifest to run instead of a subcommand")
    _common(parser)
    sub = parser.add_subparsers(dest="subcommand")

    p = sub.add_parser("simulate", help="sample paths, their interaction events and decks")
    _process(p)
    p.add_argument("-t", "--steps", dest="t", type=int, default=10)
    p.add_argument("--replicas", type=int, default=1)
    _common(p)

    p = sub.add_parser("stopping", help="Monte Carlo tail of a mutation time")
    _process(p, n_list=True)
    p.add_argument("--rule", choices=("all-pairs", "sequential"), default="all-pairs")
    p.add_argument("--t-grid", type=_int_list, default=None)
    p.add_argument("--replicas", type=int, default=1000)
    _common(p)

    p = sub.add_parser("mixing-exact", help="exact separation, total variation and P(T > t)")
    _process(p)
    p.add_argument("--t-grid", type=_int_list, default=None)
    p.add_argument("--rule", choices=("all-pairs", "sequential"), default="all-pairs")
    _common(p)

    p = sub.add_parser("scaling", help="log-log fit of a stopping-time statistic")
    _process(p, n_list=True)
    p.add_argument("--replicas", type=int, default=1000)
    p.add_argument("--statistic", default="pair_mean")
    _common(p)

    p = sub.add_parser("mutate-verify", help="exhaustive check of a mutation map")
    _process(p)
    p.add_argument("-t", type=int, default=3)
    p.add_argument("--rule", choices=("fast", "slow"), default="fast")
    _common(p)

    p = sub.add_parser("counterexample", help="conditional law of the deck given all pairs interacted")
    p.add_argument("--family", choices=FAMILIES, default="wash1d")
    p.add_argument("-n", type=int, default=3)
    p.add_argument("-t", type=int, default=3)
    _common(p)

    p = sub.add_parser("factorize", help="cycles, Cayley length and star factorization")
    p.add_argument("permutation", nargs="?", help="one-line form, e.g. [2,3,1]")
    p.add_argument("--sequence", help="JSON list of pairs for a greedy subsequence factorization")
    p.add_argument("--input", help="JSON file with a permutation and an optional sequence")
    _common(p)

    p = sub.add_parser("spanning", help="shortest spanning prefix versus coupon collector")
    p.add_argument("--n-list", type=_int_list, default=[4, 5])
    p.add_argument("--seeds", type=int, default=10_000)
    _common(p)

    p = sub.add_parser("suite", help="run every acceptance criterion")
    p.add_argument("--quick", action="store_true", help="small replica counts and grids")
    _common(p)
    return parser


def experiment_from_args(args):
    """The single manifest entry equivalent to a direct subcommand invocation."""
    exp = {"subcommand": args.subcommand, "output": args.subcommand.replace("-", "_"), "seed": args.seed}
    for key in ("family", "n", "n_list", "t", "t_grid", "replicas", "rule", "statistic",
                "permutation", "seeds"):
        value = getattr(args, key, None)
        if value is not None:
            exp[key] = value
    params = {k: getattr(args, k, None) for k in ("p", "d", "merge")}
    params = {k: v for k, v in params.items() if v is not None}
    if params:
        exp["params"] = params
    if getattr(args, "sequence", None):
        try:
            exp["sequence"] = decode_json(args.sequence)
        except ValueError as err:
            raise ShuffleValidationError(f"--sequence is not a JSON list of pairs: {err}") from err
    if getattr(args, "input", None):
        for key, value in _read_input(args.input).items():
            if key in ("permutation", "sequence"):
                exp.setdefault(key, value)
    return exp


def _read_input(filename):
    try:
        with open(filename) as f:
            return dict(decode_json(f.read()))
    except (OSError, ValueError, TypeError) as err:
        raise ShuffleValidationError(f"Cannot read input {filename}: {err}") from err


def _print_outputs(meta, out_dir):
    for experiment in meta.state["experiments"]:
        for filename in experiment.get("files", []):
            with open(os.path.join(out_dir, filename)) as f:
                print(f.read())


def _configure_logging(verbose):
    level = logging.WARNING if verbose == 0 else (logging.INFO if verbose == 1 else logging.DEBUG)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.subcommand is None and args.manifest is None:
        parser.print_help()
        return EXIT_VALIDATION
    _configure_logging(args.verbose)
    try:
        if args.subcommand == "suite":
            paper_suite(args.out, args.seed, args.quick)
            return EXIT_OK
        if args.subcommand is None:
            manifest = ExperimentManifest.from_file(args.manifest)
        else:
            manifest = ExperimentManifest([experiment_from_args(args)], seed=args.seed, fmt=args.format)
        meta = run_manifest(manifest, args.out, args.workers)
        if args.subcommand in PRINTED:
            _print_outputs(meta, args.out)
        return EXIT_OK if meta.ok else EXIT_VALIDATION
    except ShuffleValidationError as err:
        logger.error(str(err))
        return EXIT_VALIDATION
    except CriterionFailure as err:
        logger.error(str(err))
        return EXIT_CRITERION
    except ContractViolation as err:
        logger.error(str(err))
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
