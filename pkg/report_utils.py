# report_utils.py
"""
JSON helpers for reports.

- NaN / inf become null, numpy scalars and arrays become plain Python.
- Every artifact is wrapped as {"manifest": {...}, "payload": {...}}.
"""

from __future__ import annotations

import json
import math
from enum import Enum
from typing import Any, Dict

import numpy as np


# === Utility functions ======================================================

def _is_missing(v: Any) -> bool:
    """Treat None / NaN / inf as missing."""
    if v is None:
        return True
    if isinstance(v, (float, np.floating)) and not math.isfinite(float(v)):
        return True
    return False


def _clean_for_json(obj: Any) -> Any:
    """
    Make a report tree JSON-safe.
    We only keep simple serialisable values.
    """
    if isinstance(obj, dict):
        return {str(k): _clean_for_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean_for_json(x) for x in obj]
    if isinstance(obj, np.ndarray):
        return [_clean_for_json(x) for x in obj.tolist()]
    if isinstance(obj, Enum):
        return obj.value if not isinstance(obj.value, tuple) else obj.name
    if _is_missing(obj):
        return None
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


# === Serialisation ==========================================================

def to_json(obj: Any) -> str:
    return json.dumps(_clean_for_json(obj), indent=2, allow_nan=False)


def envelope(manifest: Dict[str, Any], payload: Any) -> Dict[str, Any]:
    return {"manifest": manifest, "payload": payload}


def write_json(path, obj: Any) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(to_json(obj))
        fh.write("\n")
