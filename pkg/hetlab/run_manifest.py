# hetlab/run_manifest.py

"""
Glue between the management commands and the laboratory modules:
run manifests, input loading with exit-code mapping, and output writing.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional

from django.core.management.base import CommandError

from config import VERSION
from errors import HetlabError
from ingestion_utils import load_coefficients
from report_utils import envelope, to_json, write_json
from vector_field import CoefficientSet


# --------------------------------------------------------------------
# EXIT CODES
# --------------------------------------------------------------------
EXIT_INPUT_ERROR = 1
EXIT_CONDITION_FAILURE = 2
EXIT_SEARCH_EXHAUSTED = 3


@dataclass
class RunManifest:
    command: str
    inputs: Dict[str, Optional[str]] = field(default_factory=dict)
    config: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    version: str = VERSION
    timestamp: bool = True
    notes: Dict[str, Any] = field(default_factory=dict)
    started_at: Optional[str] = None
    duration_seconds: Optional[float] = None
    _t0: float = field(default=0.0, repr=False)

    @classmethod
    def start(cls, command: str, timestamp: bool = True, **kwargs) -> "RunManifest":
        m = cls(command=command, timestamp=timestamp, **kwargs)
        m._t0 = time.monotonic()
        if timestamp:
            m.started_at = datetime.now(timezone.utc).isoformat()
        return m

    def finish(self) -> "RunManifest":
        if self.timestamp:
            self.duration_seconds = time.monotonic() - self._t0
        return self

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "inputs": dict(self.inputs),
            "config": self.config,
            "seed": self.seed,
            "version": self.version,
            "started_at": self.started_at,
            "duration_seconds": self.duration_seconds,
            "notes": self.notes,
        }


# --------------------------------------------------------------------
# INPUTS
# --------------------------------------------------------------------

def input_error(exc: Exception) -> CommandError:
    return CommandError(f"{type(exc).__name__}: {exc}", returncode=EXIT_INPUT_ERROR)


def read_coefficients(path: str) -> CoefficientSet:
    if not path:
        raise CommandError("--coeffs is required", returncode=EXIT_INPUT_ERROR)
    try:
        return load_coefficients(path)
    except HetlabError as e:
        raise input_error(e) from e


def prepare_output_dir(path) -> Path:
    """Create the directory and check it is writable before any work starts."""
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise CommandError(f"cannot create output directory {out}: {e}", returncode=EXIT_INPUT_ERROR) from e
    if not out.is_dir() or not os.access(out, os.W_OK):
        raise CommandError(f"output directory {out} is not writable", returncode=EXIT_INPUT_ERROR)
    return out


# --------------------------------------------------------------------
# OUTPUTS
# --------------------------------------------------------------------

def render(manifest: RunManifest, payload: Any) -> str:
    return to_json(envelope(manifest.to_dict(), payload))


def save(path, manifest: RunManifest, payload: Any) -> None:
    write_json(path, envelope(manifest.to_dict(), payload))
