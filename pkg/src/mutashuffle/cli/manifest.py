import concurrent.futures
import contextlib
import copy
import hashlib
import logging
import os
import threading
import time

import pandas as pd

from .. import __version__
from ..errors import ShuffleValidationError
from ..processes import FAMILIES
from ..utils.json_utils import decode_json, encode_json
from ..utils.seeding import DEFAULT_SEED
from .experiments import EXPERIMENTS, STOCHASTIC, check_params

logger = logging.getLogger(__name__)

MANIFEST_VERSIONS = ("1",)
METADATA_FILE = "run_metadata.json"
OUTPUT_FORMATS = ("csv", "json")


class ExperimentManifest(object):
    """A versioned list of experiments, validated as a whole before anything runs.

    Each experiment is a dict with at least ``subcommand`` and ``output`` (a path relative to
    the output directory, without extension). The other keys are the subcommand's parameters.
    """

    def __init__(self, experiments=None, version="1", seed=DEFAULT_SEED, fmt="csv"):
        self._config = dict(
            version=str(version),
            experiments=[dict(e) for e in (experiments or [])],
            seed=int(seed),
            format=fmt,
        )

    @property
    def version(self):
        return self._config.get("version")

    @property
    def experiments(self):
        return [dict(e) for e in self._config.get("experiments")]

    @property
    def seed(self):
        return self._config.get("seed")

    @property
    def format(self):
        return self._config.get("format")

    @classmethod
    def from_dict(cls, d):
        if "experiments" not in d:
            raise ShuffleValidationError("A manifest needs an 'experiments' list")
        return cls(d["experiments"], d.get("version", "1"), d.get("seed", DEFAULT_SEED), d.get("format", "csv"))

    @classmethod
    def from_file(cls, filename):
        try:
            with open(filename) as f:
                d = decode_json(f.read())
        except (OSError, ValueError) as err:
            raise ShuffleValidationError(f"Cannot read manifest {filename}: {err}") from err
        return cls.from_dict(d)

    def to_dict(self):
        return copy.deepcopy(self._config)

    def digest(self):
        return hashlib.sha256(encode_json(self.to_dict()).encode()).hexdigest()

    def validate(self):
        if self.version not in MANIFEST_VERSIONS:
            raise ShuffleValidationError(f"Unknown manifest version {self.version}")
        if self.format not in OUTPUT_FORMATS:
            raise ShuffleValidationError(f"Unknown output format {self.format}")
        outputs = set()
        for k, exp in enumerate(self._config["experiments"]):
            sub = exp.get("subcommand")
            if sub not in EXPERIMENTS:
                raise ShuffleValidationError(f"Experiment {k}: unknown subcommand {sub}")
            if "family" in exp and exp["family"] not in FAMILIES:
                raise ShuffleValidationError(f"Experiment {k}: unknown family {exp['family']}")
            out = exp.get("output")
            if not out:
                raise ShuffleValidationError(f"Experiment {k}: missing output path")
            if out in outputs:
                raise ShuffleValidationError(f"Experiment {k}: duplicate output path {out}")
            outputs.add(out)
            if sub in STOCHASTIC and "seed" not in exp:
                raise ShuffleValidationError(f"Experiment {k}: stochastic experiments need a seed")
            params = {key: v for key, v in exp.items() if key not in ("subcommand", "output")}
            try:
                check_params(sub, params)
            except ShuffleValidationError as err:
                raise ShuffleValidationError(f"Experiment {k}: {err}") from err
        return self


class RunMetadata(object):
    """Version, manifest hash, seed, timing and per-experiment status of one batch run."""

    def __init__(self, manifest_hash, seed, n_experiments=0):
        self._lock = threading.RLock()
        self._state = {
            "version": __version__,
            "manifest_hash": manifest_hash,
            "seed": seed,
            "wall_clock": 0.0,
            "experiments": [{"status": "pending"} for _ in range(n_experiments)],
        }

    @property
    def state(self):
        with self._lock:
            return copy.deepcopy(self._state)

    @contextlib.contextmanager
    def txn(self):
        """Context manager for a metadata modification transaction."""
        with self._lock:
            new_state = copy.deepcopy(self._state)
            yield new_state
            self._state = new_state

    @property
    def ok(self):
        return all(e["status"] == "ok" for e in self.state["experiments"])

    def write(self, out_dir):
        with open(os.path.join(out_dir, METADATA_FILE), "w") as f:
            f.write(encode_json(self.state, indent=2))

    def to_json(self):
        return self.state


def write_output(stem, data, fmt):
    """Writes one output as CSV or JSON; returns the filename."""
    if isinstance(data, pd.DataFrame):
        if fmt == "csv":
            filename = stem + ".csv"
            data.to_csv(filename, index=False)
            return filename
        data = data.to_dict(orient="records")
    filename = stem + ".json"
    with open(filename, "w") as f:
        f.write(encode_json(data, indent=2))
    return filename


def run_experiment(index, experiment, out_dir, fmt="csv"):
    """Runs one experiment and writes its outputs. Safe to call in a worker process."""
    params = dict(experiment)
    params.setdefault("index", index)
    sub = params.pop("subcommand")
    stem = os.path.join(out_dir, params.pop("output"))
    os.makedirs(os.path.dirname(stem) or ".", exist_ok=True)
    started = time.perf_counter()
    files = [write_output(stem + suffix, data, fmt) for suffix, data in EXPERIMENTS[sub](params)]
    return {
        "status": "ok",
        "subcommand": sub,
        "files": [os.path.relpath(f, out_dir) for f in files],
        "seconds": round(time.perf_counter() - started, 3),
    }


def run_manifest(manifest: ExperimentManifest, out_dir, workers=1) -> RunMetadata:
    """Validates the manifest, runs every experiment and writes run_metadata.json.

    Experiments run in a pool of `workers` processes (inline when 1). A validation error
    inside an experiment marks it failed; contract violations propagate.
    """
    manifest.validate()
    os.makedirs(out_dir, exist_ok=True)
    experiments = manifest.experiments
    meta = RunMetadata(manifest.digest(), manifest.seed, len(experiments))
    started = time.perf_counter()

    def record(index, outcome):
        with meta.txn() as s:
            s["experiments"][index] = outcome
        logger.info(f"Experiment {index} ({experiments[index]['subcommand']}): {outcome['status']}")

    def failed(err):
        return {"status": "failed", "error": f"{type(err).__name__}: {err}"}

    if workers <= 1:
        for k, exp in enumerate(experiments):
            try:
                record(k, run_experiment(k, exp, out_dir, manifest.format))
            except ShuffleValidationError as err:
                record(k, failed(err))
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(run_experiment, k, exp, out_dir, manifest.format): k
                for k, exp in enumerate(experiments)
            }
            for future in concurrent.futures.as_completed(futures):
                try:
                    record(futures[future], future.result())
                except ShuffleValidationError as err:
                    record(futures[future], failed(err))
    with meta.txn() as s:
        s["wall_clock"] = round(time.perf_counter() - started, 3)
    meta.write(out_dir)
    return meta
