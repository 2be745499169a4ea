from .manifest import ExperimentManifest, RunMetadata, run_manifest
from .suite import paper_suite
from .main import main
