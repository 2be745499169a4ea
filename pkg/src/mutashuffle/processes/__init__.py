from ..errors import ShuffleValidationError
from .base import (
    FAMILIES,
    ProcessSpec,
    ShufflingProcess,
    InteractionEvent,
    Transition,
    WASH1D,
    WASH1D_LONG,
    WASH_GRID,
    ADJ_TRANSPOSITION,
    CYCLE_TRANSPOSITION,
    RANDOM_TO_RANDOM,
    RANDOM_TO_TOP,
)
from .walks import AdjacentTransposition, CycleTransposition, RandomToRandom, RandomToTop
from .wash import Wash1D, Wash1DLong, WashGrid, JumbledView
from .paths import Path, simulate, replay, enumerate_paths

_PROCESS_CLASSES = {
    WASH1D: Wash1D,
    WASH1D_LONG: Wash1DLong,
    WASH_GRID: WashGrid,
    ADJ_TRANSPOSITION: AdjacentTransposition,
    CYCLE_TRANSPOSITION: CycleTransposition,
    RANDOM_TO_RANDOM: RandomToRandom,
    RANDOM_TO_TOP: RandomToTop,
}


def build_process(spec, n=None, **params):
    """Process for a `ProcessSpec`, or for a family name plus deck size and parameters."""
    if not isinstance(spec, ProcessSpec):
        if n is None:
            raise ShuffleValidationError(f"Deck size required to build {spec}")
        spec = ProcessSpec(spec, n, **params)
    cls = _PROCESS_CLASSES.get(spec.family)
    if cls is None:
        raise ShuffleValidationError(
            f"Unknown family: {spec.family}. Must be one of {', '.join(FAMILIES)}"
        )
    return cls(spec)
