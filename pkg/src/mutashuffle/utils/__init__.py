from .json_utils import encode_json, decode_json, json_encoder_default
from .seeding import replica_rng, experiment_seed
