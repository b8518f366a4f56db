# coefficient_config.py

# Key order of the flat coefficient JSON object. Serialisation and the
# CoefficientSet dataclass both follow this order.

COEFFICIENT_KEYS = (
    # ---- quadratic couplings, row i = equation for x_i ----
    "b11", "b12", "b13", "b14",
    "b21", "b22", "b23", "b24",
    "b31", "b32", "b33", "b34",
    "b41", "b42", "b43", "b44",
    # ---- cubic terms ----
    "c1", "c3", "c4",
    # ---- x1-coupling of the transverse equations ----
    "d2", "d3", "d4",
)

# Reference set REF-1. Passes every row C1-C18; the entries those rows leave
# free (b23, b24, b32, b34, b42, b43) are set to -1 so infinity repels.
REFERENCE_COEFFICIENTS = {
    "b11": 3.0, "b12": 1.0, "b13": -1.0, "b14": -1.0,
    "b21": 1.0, "b22": -0.1, "b23": -1.0, "b24": -1.0,
    "b31": 1.0, "b32": -1.0, "b33": -1.0, "b34": -1.0,
    "b41": 1.2, "b42": -1.0, "b43": -1.0, "b44": -1.0,
    "c1": -1.0, "c3": -1.0, "c4": -1.0,
    "d2": -4.0, "d3": 4.0, "d4": 5.0,
}

# Default search box: sign-compatible sub-boxes for every row C1-C18.
DEFAULT_SEARCH_BOX = {
    "b11": (0.5, 5.0), "b12": (0.1, 5.0), "b13": (-5.0, -0.1), "b14": (-5.0, -0.1),
    "b21": (0.1, 5.0), "b22": (-1.0, -0.01), "b23": (-5.0, -0.1), "b24": (-5.0, -0.1),
    "b31": (0.1, 5.0), "b32": (-5.0, -0.1), "b33": (-5.0, -0.1), "b34": (-5.0, -0.1),
    "b41": (0.1, 5.0), "b42": (-5.0, -0.1), "b43": (-5.0, -0.1), "b44": (-5.0, -0.1),
    "c1": (-5.0, -0.1), "c3": (-5.0, -0.1), "c4": (-5.0, -0.1),
    "d2": (-5.0, 5.0), "d3": (-5.0, 5.0), "d4": (-5.0, 5.0),
}
