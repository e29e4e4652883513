"""Execute a demonstration through the simulator, recording labeled frames."""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List

import numpy as np

from ropetwin.errors import DemoValidationError, DivergenceError
from ropetwin.extract.lift import resample_arclength
from ropetwin.extract.types import ParticleState
from ropetwin.rodsim import (GripperState, RodMaterial, RodState, SimConfig,
                             init_rod, step_frame, update_grasp)

from .demo import Demonstration

PROPRIO_DIM = 16
# gripper parked poses used when a demonstration carries no frames at all
PARK_LEFT = (-1.0, 0.0, 1.0)
PARK_RIGHT = (1.0, 0.0, 1.0)


def proprio(left: GripperState, right: GripperState) -> np.ndarray:
    """16-vector [L pos(3), L quat xyzw(4), L open(1), R ...same(8)]."""
    return np.concatenate([
        left.position, left.orientation, [left.openness],
        right.position, right.orientation, [right.openness],
    ]).astype(np.float64)


def grippers_from_proprio(q):
    q = np.asarray(q, dtype=np.float64).reshape(PROPRIO_DIM)
    left = GripperState(q[0:3].copy(), q[3:7].copy(), float(q[7]))
    right = GripperState(q[8:11].copy(), q[11:15].copy(), float(q[15]))
    return left, right


@dataclass
class LabeledTrajectory:
    demo_id: str
    rope_id: str
    times: np.ndarray                 # (T,)
    states: np.ndarray                # (T, 100, 3)
    left_q: np.ndarray                # (T, 8) pos+quat+open
    right_q: np.ndarray               # (T, 8)
    actions: np.ndarray               # (T, 16) targets applied at each frame

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64).reshape(-1)
        t = len(self.times)
        self.states = np.asarray(self.states, dtype=np.float64).reshape(
            t, ParticleState.COUNT, 3)
        self.left_q = np.asarray(self.left_q, dtype=np.float64).reshape(t, 8)
        self.right_q = np.asarray(self.right_q, dtype=np.float64).reshape(t, 8)
        self.actions = np.asarray(self.actions, dtype=np.float64).reshape(
            t, PROPRIO_DIM)

    @property
    def frame_count(self) -> int:
        return len(self.times)

    def gripper_states(self, i: int):
        return grippers_from_proprio(
            np.concatenate([self.left_q[i], self.right_q[i]]))


def _canonical_points(state: RodState) -> np.ndarray:
    if state.particle_count == ParticleState.COUNT:
        return state.positions.copy()
    return resample_arclength(state.positions, ParticleState.COUNT).points


def replay(demo: Demonstration, init: ParticleState, material: RodMaterial,
           config: SimConfig) -> LabeledTrajectory:
    """Drive both grippers through the demo targets, one frame per record.

    The demo's declared rate must match the simulation frame rate; resample
    first if it does not. Divergence mid-run carries the offending frame
    index on the raised error.
    """
    expect_hz = 1.0 / config.frame_dt
    if abs(demo.rate_hz - expect_hz) > 1e-9:
        raise DemoValidationError(
            f"demo rate {demo.rate_hz} Hz != simulation frame rate "
            f"{expect_hz} Hz; resample the demo first")

    rod = init_rod(init.points, material, config)
    if demo.frame_count == 0:
        left = GripperState.parked(PARK_LEFT)
        right = GripperState.parked(PARK_RIGHT)
        q16 = proprio(left, right)
        return LabeledTrajectory(
            demo_id=demo.demo_id, rope_id=demo.rope_id,
            times=np.array([0.0]),
            states=_canonical_points(rod)[None],
            left_q=q16[None, :8], right_q=q16[None, 8:],
            actions=q16[None])

    t_count = demo.frame_count
    times = demo.times.copy()
    states = np.empty((t_count, ParticleState.COUNT, 3))
    actions = np.empty((t_count, PROPRIO_DIM))
    left = GripperState.parked(PARK_LEFT)
    right = GripperState.parked(PARK_RIGHT)

    for i in range(t_count):
        left = GripperState(demo.left.positions[i], demo.left.orientations[i],
                            float(demo.left.openness[i]), left.attachment)
        right = GripperState(demo.right.positions[i], demo.right.orientations[i],
                             float(demo.right.openness[i]), right.attachment)
        left = update_grasp(rod, left, config)
        right = update_grasp(rod, right, config)
        try:
            rod = step_frame(rod, left, right, material, config)
        except DivergenceError as exc:
            raise DivergenceError(str(exc), frame=i) from exc
        states[i] = _canonical_points(rod)
        actions[i] = proprio(left, right)

    return LabeledTrajectory(
        demo_id=demo.demo_id, rope_id=demo.rope_id, times=times,
        states=states, left_q=actions[:, :8], right_q=actions[:, 8:],
        actions=actions)


def save_trajectory(traj: LabeledTrajectory, path) -> None:
    meta = json.dumps({"demo_id": traj.demo_id, "rope_id": traj.rope_id})
    np.savez_compressed(
        Path(path), meta=np.frombuffer(meta.encode(), dtype=np.uint8),
        times=traj.times, states=traj.states, left_q=traj.left_q,
        right_q=traj.right_q, actions=traj.actions)


def load_trajectory(path) -> LabeledTrajectory:
    with np.load(Path(path)) as z:
        meta = json.loads(z["meta"].tobytes().decode())
        return LabeledTrajectory(
            demo_id=meta["demo_id"], rope_id=meta["rope_id"],
            times=z["times"], states=z["states"],
            left_q=z["left_q"], right_q=z["right_q"], actions=z["actions"])
