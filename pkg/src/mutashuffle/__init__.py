import logging

from . import perm
from . import processes
from . import stopping
from . import mutation
from . import mixing
from .perm import Permutation, Transposition
from .processes import ProcessSpec, ShufflingProcess

logging.getLogger(__name__).addHandler(logging.NullHandler())

__version__ = "1.0.0"
