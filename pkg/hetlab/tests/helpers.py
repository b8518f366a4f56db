import json
import os

import numpy as np

from coefficient_config import COEFFICIENT_KEYS, DEFAULT_SEARCH_BOX, REFERENCE_COEFFICIENTS
from vector_field import CoefficientSet

X_A = -0.3027756377319946
X_B = 3.3027756377319946

EIG_XI_A = (-1.0916731, 2.3027756, -0.1194293, -0.4038703)
EIG_XI_B = (-11.9083269, -1.3027756, 25.1194293, 30.6038703)


def ref() -> CoefficientSet:
    return CoefficientSet.from_dict(REFERENCE_COEFFICIENTS)


def random_valid_sets(n: int, seed: int = 0):
    """Sets drawn from the default box; c1 < 0 there, so both roots exist with opposite signs."""
    rng = np.random.default_rng(seed)
    lows = np.array([DEFAULT_SEARCH_BOX[k][0] for k in COEFFICIENT_KEYS])
    highs = np.array([DEFAULT_SEARCH_BOX[k][1] for k in COEFFICIENT_KEYS])
    return [CoefficientSet.from_vector(rng.uniform(lows, highs)) for _ in range(n)]


def write_json(directory: str, name: str, data) -> str:
    path = os.path.join(directory, name)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh)
    return path
