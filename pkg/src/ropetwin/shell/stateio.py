"""Canonical particle state on disk: state-v1 JSON.

One object: {"format": "state-v1", "points": [[x, y, z] x 100]}.
"""
import json
from pathlib import Path

import numpy as np

from ropetwin.errors import StateParseError
from ropetwin.extract import ParticleState

FORMAT_NAME = "state-v1"


def save_state(path, state: ParticleState) -> None:
    payload = {"format": FORMAT_NAME, "points": state.points.tolist()}
    Path(path).write_text(json.dumps(payload, separators=(",", ":")) + "\n",
                          encoding="utf-8")


def load_state(path) -> ParticleState:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise StateParseError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != FORMAT_NAME:
        raise StateParseError(f"{path}: expected format {FORMAT_NAME!r}")
    pts = payload.get("points")
    if pts is None:
        raise StateParseError(f"{path}: missing points")
    return ParticleState(np.asarray(pts, dtype=np.float64))
