"""Websocket wire protocol: one JSON object per text frame.

Client -> server: cmd, record_start, record_stop, reset, snapshot.
Server -> client: state, ack, error, recording.

Every outgoing builder returns a compact JSON string so the broadcast
loop serializes each frame exactly once for all clients.
"""
import json
import math
from typing import List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from ropetwin.errors import ProtocolError


class CmdMessage(BaseModel):
    model_config = ConfigDict(extra="forbid")
    type: Literal["cmd"]
    arm: Literal["left", "right"]
    pos: List[float] = Field(min_length=3, max_length=3)
    quat: List[float] = Field(min_length=4, max_length=4)
    open: float

    @field_validator("pos", "quat")
    @classmethod
    def _finite(cls, v):
        if not all(math.isfinite(x) for x in v):
            raise ValueError("non-finite coordinate")
        return v

    @field_validator("quat")
    @classmethod
    def _normalizable(cls, v):
        if math.sqrt(sum(x * x for x in v)) < 1e-12:
            raise ValueError("zero-norm quaternion")
        return v

    @field_validator("open")
    @classmethod
    def _clamped(cls, v):
        if not math.isfinite(v):
            raise ValueError("non-finite openness")
        return min(1.0, max(0.0, v))


class RecordStartMessage(BaseModel):
    model_config = ConfigDict(extra="forbid")
    type: Literal["record_start"]
    rope_id: str


class RecordStopMessage(BaseModel):
    model_config = ConfigDict(extra="forbid")
    type: Literal["record_stop"]


class ResetMessage(BaseModel):
    model_config = ConfigDict(extra="forbid")
    type: Literal["reset"]
    preset: Optional[str] = None
    centerline: Optional[List[List[float]]] = None

    @field_validator("centerline")
    @classmethod
    def _valid_polyline(cls, v):
        if v is None:
            return v
        if len(v) < 2:
            raise ValueError("centerline needs at least 2 points")
        for p in v:
            if len(p) != 3 or not all(math.isfinite(x) for x in p):
                raise ValueError("centerline points must be finite triples")
        return v


class SnapshotMessage(BaseModel):
    model_config = ConfigDict(extra="forbid")
    type: Literal["snapshot"]


ClientMessage = Union[CmdMessage, RecordStartMessage, RecordStopMessage,
                      ResetMessage, SnapshotMessage]

_CLIENT_TYPES = {
    "cmd": CmdMessage,
    "record_start": RecordStartMessage,
    "record_stop": RecordStopMessage,
    "reset": ResetMessage,
    "snapshot": SnapshotMessage,
}


def parse_client_message(text: str) -> ClientMessage:
    """Parse one client frame; raises ProtocolError(code="bad_message")."""
    try:
        payload = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ProtocolError(f"not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ProtocolError("message must be a JSON object")
    kind = payload.get("type")
    model = _CLIENT_TYPES.get(kind)
    if model is None:
        raise ProtocolError(f"unknown message type: {kind!r}")
    try:
        return model.model_validate(payload)
    except ValueError as exc:
        raise ProtocolError(f"invalid {kind} message: {exc}") from exc


def _gripper_payload(gripper) -> dict:
    return {
        "pos": [float(x) for x in gripper.position],
        "quat": [float(x) for x in gripper.orientation],
        "open": float(gripper.openness),
    }


def state_message(t: float, particles: np.ndarray, left, right,
                  n_crossings: int) -> str:
    return json.dumps({
        "type": "state",
        "t": float(t),
        "particles": np.asarray(particles, dtype=np.float64).tolist(),
        "grippers": {"left": _gripper_payload(left),
                     "right": _gripper_payload(right)},
        "crossings": int(n_crossings),
    }, separators=(",", ":"))


def snapshot_ack(particles: np.ndarray) -> str:
    return json.dumps({
        "type": "ack",
        "of": "snapshot",
        "particles": np.asarray(particles, dtype=np.float64).tolist(),
    }, separators=(",", ":"))


def reset_ack() -> str:
    return json.dumps({"type": "ack", "of": "reset"}, separators=(",", ":"))


def error_message(code: str, text: str) -> str:
    return json.dumps({"type": "error", "code": code, "text": text},
                      separators=(",", ":"))


def recording_message(active: bool, frames: int, rope_id: Optional[str] = None,
                      path: Optional[str] = None) -> str:
    payload = {"type": "recording", "active": bool(active),
               "frames": int(frames)}
    if rope_id is not None:
        payload["rope_id"] = rope_id
    if path is not None:
        payload["path"] = path
    return json.dumps(payload, separators=(",", ":"))
