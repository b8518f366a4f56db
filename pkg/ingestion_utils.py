# ingestion_utils.py

import json
import logging
import math
import os
from typing import Any, Dict, Tuple

from coefficient_config import COEFFICIENT_KEYS
from errors import CoefficientFormatError, ConfigError, DomainError
from vector_field import CoefficientSet, StateVector, as_state

logger = logging.getLogger(__name__)

VALID_EXT = {".json"}


# ---------------------------------------------------
# RAW JSON: FILE PATH OR FILE-LIKE
# ---------------------------------------------------

def _read_json(path_or_file) -> Any:
    """
    Accepts BOTH:
    - file path string
    - an open text file / StringIO
    """
    if hasattr(path_or_file, "read"):
        name = getattr(path_or_file, "name", "<stream>")
        text = path_or_file.read()
    elif isinstance(path_or_file, (str, os.PathLike)):
        name = os.fspath(path_or_file)
        ext = os.path.splitext(name)[1].lower()
        if ext and ext not in VALID_EXT:
            logger.warning("[Ingest] unexpected extension %s for %s, reading as JSON", ext, name)
        try:
            with open(name, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise CoefficientFormatError(f"cannot read {name}: {e}") from e
    else:
        raise TypeError("expected a file path or a file-like object")

    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise CoefficientFormatError(f"{name} is not valid JSON: {e}") from e


# ---------------------------------------------------
# COEFFICIENT FILES
# ---------------------------------------------------

def load_coefficients(path_or_file) -> CoefficientSet:
    """Plain coefficient object, or the {"manifest", "payload"} envelope find_coeffs writes."""
    data = _read_json(path_or_file)
    if isinstance(data, dict) and set(data) == {"manifest", "payload"}:
        data = data["payload"]
    coeffs = CoefficientSet.from_dict(data)
    logger.debug("[Ingest] loaded coefficient set from %s", path_or_file)
    return coeffs


def dump_coefficients(coeffs: CoefficientSet) -> str:
    return json.dumps(coeffs.to_dict(), indent=2)


# ---------------------------------------------------
# SEARCH BOX FILES
# ---------------------------------------------------

def parse_box(data: Dict[str, Any]) -> Dict[str, Tuple[float, float]]:
    """
    Box file layout: {"b11": [lower, upper], ...} with every coefficient key.
    """
    if not isinstance(data, dict):
        raise CoefficientFormatError("box file must hold a JSON object")
    unknown = sorted(set(data) - set(COEFFICIENT_KEYS))
    if unknown:
        raise CoefficientFormatError(f"unknown coefficient key {unknown[0]!r} in box", key=unknown[0])

    box = {}
    for k in COEFFICIENT_KEYS:
        if k not in data:
            raise CoefficientFormatError(f"missing box entry {k!r}", key=k)
        pair = data[k]
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise CoefficientFormatError(f"box entry {k!r} must be [lower, upper]", key=k)
        try:
            lo, hi = float(pair[0]), float(pair[1])
        except (TypeError, ValueError) as e:
            raise CoefficientFormatError(f"box entry {k!r} is not numeric", key=k) from e
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise DomainError(f"box entry {k!r} is not finite")
        if lo > hi:
            raise ConfigError(f"box entry {k!r} has lower > upper ({lo} > {hi})")
        box[k] = (lo, hi)
    return box


def load_box(path_or_file) -> Dict[str, Tuple[float, float]]:
    return parse_box(_read_json(path_or_file))


# ---------------------------------------------------
# STATE STRINGS ("0.1,0,0,0")
# ---------------------------------------------------

def parse_state(text: str) -> StateVector:
    parts = [p.strip() for p in str(text).split(",") if p.strip()]
    if len(parts) != 4:
        raise ConfigError(f"initial state needs 4 comma-separated numbers, got {text!r}")
    try:
        values = [float(p) for p in parts]
    except ValueError as e:
        raise ConfigError(f"initial state {text!r} is not numeric") from e
    return as_state(values)
