import collections
import json
import numbers
from fractions import Fraction

import numpy as np

min_safe_integer = -9007199254740991
max_safe_integer = 9007199254740991


def json_encoder_default(obj):
    """JSON encoder function that handles numpy types, exact rationals and permutations.

    Fractions are written as "p/q" strings so that exact outputs survive the round trip;
    anything exposing `to_json` (permutations, cycle decompositions, star vectors) is
    delegated to it.
    """
    if isinstance(obj, Fraction):
        if obj.denominator == 1:
            return obj.numerator
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, numbers.Integral) and (
        obj < min_safe_integer or obj > max_safe_integer
    ):
        return str(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    elif isinstance(obj, np.floating):
        return float(obj)
    elif isinstance(obj, np.bool_):
        return bool(obj)
    elif isinstance(obj, np.ndarray):
        return obj.tolist()
    elif isinstance(obj, (set, frozenset)):
        return sorted(obj)
    elif hasattr(obj, "to_json"):
        return obj.to_json()
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


def decode_json(x):
    return json.loads(x, object_pairs_hook=collections.OrderedDict)


def encode_json(obj, indent=None):
    return json.dumps(obj, default=json_encoder_default, indent=indent, sort_keys=False)


def parse_fraction(value):
    """Reads "p/q" strings, ints and decimal strings into an exact Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)
