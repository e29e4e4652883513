"""Recorded bimanual demonstrations: jsonl parsing and rate resampling.

File format (.demo.jsonl): the first line holds metadata
{"format":"demo-v1","rope_id":str,"rate_hz":num}; every further line is
one frame {"t":s,"left":{"pos":[3],"quat":[4],"open":f},"right":{...}}.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ropetwin import quat
from ropetwin.errors import (DemoOrderingError, DemoParseError,
                             DemoValidationError, TooShortError)

FORMAT_NAME = "demo-v1"
QUAT_NORM_TOL = 1e-3


@dataclass
class ArmTrack:
    positions: np.ndarray     # (F, 3)
    orientations: np.ndarray  # (F, 4) xyzw, unit
    openness: np.ndarray      # (F,) in [0, 1]

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64).reshape(-1, 3)
        self.orientations = np.asarray(self.orientations, dtype=np.float64).reshape(-1, 4)
        self.openness = np.asarray(self.openness, dtype=np.float64).reshape(-1)


@dataclass
class Demonstration:
    rope_id: str
    rate_hz: float
    times: np.ndarray
    left: ArmTrack
    right: ArmTrack
    demo_id: str = ""

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64).reshape(-1)

    @property
    def frame_count(self) -> int:
        return len(self.times)


def _parse_arm(obj, line_no, side):
    try:
        arm = obj[side]
        pos = np.asarray(arm["pos"], dtype=np.float64)
        q = np.asarray(arm["quat"], dtype=np.float64)
        open_ = float(arm["open"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DemoParseError(f"bad {side} arm record: {exc}", line=line_no) from exc
    if pos.shape != (3,) or q.shape != (4,):
        raise DemoParseError(f"{side} arm has wrong vector sizes", line=line_no)
    return pos, q, open_


def _validated_track(pos, quats, opens, side):
    pos = np.asarray(pos)
    quats = np.asarray(quats)
    opens = np.asarray(opens)
    if len(quats):
        norms = np.linalg.norm(quats, axis=1)
        worst = float(np.abs(norms - 1.0).max())
        if worst > QUAT_NORM_TOL:
            raise DemoValidationError(
                f"{side} quaternion norm off by {worst:.2e} (> {QUAT_NORM_TOL})")
        quats = quats / norms[:, None]
        if opens.min() < 0.0 or opens.max() > 1.0:
            raise DemoValidationError(f"{side} openness outside [0, 1]")
    return ArmTrack(pos.reshape(-1, 3), quats.reshape(-1, 4), opens)


def load_demonstration(path, demo_id: str = None) -> Demonstration:
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines or not lines[0].strip():
        raise DemoParseError("missing metadata line", line=1)
    try:
        meta = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise DemoParseError(f"metadata is not valid JSON: {exc}", line=1) from exc
    if not isinstance(meta, dict) or meta.get("format") != FORMAT_NAME:
        raise DemoParseError(f"expected format {FORMAT_NAME!r}", line=1)
    try:
        rope_id = str(meta["rope_id"])
        rate_hz = float(meta["rate_hz"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DemoParseError(f"bad metadata: {exc}", line=1) from exc
    if rate_hz <= 0.0:
        raise DemoParseError("rate_hz must be positive", line=1)

    times, lp, lq, lo, rp, rq, ro = [], [], [], [], [], [], []
    for line_no, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise DemoParseError(f"frame is not valid JSON: {exc}",
                                 line=line_no) from exc
        if "format" in obj:
            raise DemoParseError("second metadata line mid-file", line=line_no)
        try:
            times.append(float(obj["t"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise DemoParseError(f"bad frame time: {exc}", line=line_no) from exc
        for side, acc in (("left", (lp, lq, lo)), ("right", (rp, rq, ro))):
            pos, q, open_ = _parse_arm(obj, line_no, side)
            acc[0].append(pos)
            acc[1].append(q)
            acc[2].append(open_)

    times = np.asarray(times, dtype=np.float64)
    if len(times) > 1 and not np.all(np.diff(times) > 0.0):
        bad = int(np.argmin(np.diff(times) > 0.0))
        raise DemoOrderingError(
            f"frame times not strictly increasing at t={times[bad + 1]!r}")
    if demo_id is None:
        demo_id = path.name.split(".")[0]
    return Demonstration(
        rope_id=rope_id, rate_hz=rate_hz, times=times,
        left=_validated_track(lp, lq, lo, "left"),
        right=_validated_track(rp, rq, ro, "right"),
        demo_id=demo_id)


def save_demonstration(demo: Demonstration, path) -> None:
    path = Path(path)
    with open(path, "w") as f:
        f.write(json.dumps({"format": FORMAT_NAME, "rope_id": demo.rope_id,
                            "rate_hz": demo.rate_hz}) + "\n")
        for i in range(demo.frame_count):
            f.write(json.dumps({
                "t": demo.times[i],
                "left": {"pos": list(demo.left.positions[i]),
                         "quat": list(demo.left.orientations[i]),
                         "open": demo.left.openness[i]},
                "right": {"pos": list(demo.right.positions[i]),
                          "quat": list(demo.right.orientations[i]),
                          "open": demo.right.openness[i]},
            }) + "\n")


def _interp_track(track: ArmTrack, times, grid) -> ArmTrack:
    pos = np.column_stack([np.interp(grid, times, track.positions[:, d])
                           for d in range(3)])
    opens = np.interp(grid, times, track.openness)
    j = np.clip(np.searchsorted(times, grid, side="right") - 1,
                0, len(times) - 2)
    u = (grid - times[j]) / (times[j + 1] - times[j])
    quats = np.array([quat.slerp(track.orientations[a], track.orientations[a + 1],
                                 float(t)) for a, t in zip(j, np.clip(u, 0.0, 1.0))])
    return ArmTrack(pos, quats, opens)


def resample_demo(demo: Demonstration, target_hz: float = 30.0) -> Demonstration:
    """Uniform time grid t0 + i/target_hz, up to the last source time.

    Positions and openness interpolate linearly; orientations by
    shortest-path spherical interpolation.
    """
    if demo.frame_count < 2:
        raise TooShortError("resampling needs at least 2 frames")
    t0 = demo.times[0]
    n = int(np.floor((demo.times[-1] - t0) * target_hz + 1e-9)) + 1
    grid = t0 + np.arange(n) / target_hz
    return Demonstration(
        rope_id=demo.rope_id, rate_hz=float(target_hz), times=grid,
        left=_interp_track(demo.left, demo.times, grid),
        right=_interp_track(demo.right, demo.times, grid),
        demo_id=demo.demo_id)
