"""Overhand-knot state fixture: a loose trefoil-style open curve dropped
onto the table and settled under the full simulator."""

import numpy as np

from ropetwin.extract.lift import resample_arclength
from ropetwin.extract.types import ParticleState
from ropetwin.rodsim import (GripperState, RodMaterial, SimConfig, init_rod,
                             step_frame)

# the closed curve crosses itself at parameters {0.27, 1.82, 2.36, 3.92,
# 4.46, 6.01}; opening the loop around t = pi keeps all three crossings
OPEN_GAP = 0.35          # parameter trimmed off each side of the cut
CROSS_CLEARANCE = 0.025  # initial z amplitude between crossing strands, m
TAIL_FRACTION = 0.15     # rope length share of each free tail


def _trefoil_xy(t: np.ndarray) -> np.ndarray:
    return np.column_stack([np.sin(t) + 2.0 * np.sin(2.0 * t),
                            np.cos(t) - 2.0 * np.cos(2.0 * t)])


def _tail(end_xy, centroid, end_z, base_z, length, n=120):
    """Straight run leaving the knot body radially, settling onto the table."""
    direction = end_xy - centroid
    direction = direction / np.linalg.norm(direction)
    s = np.linspace(0.0, length, n)[1:]
    xy = end_xy + s[:, None] * direction
    z = base_z + (end_z - base_z) * np.exp(-s / (0.25 * length))
    return np.column_stack([xy, z])


def overhand_knot_curve(seed: int = 0, rope_length: float = 1.0,
                        radius: float = 0.005) -> np.ndarray:
    """Initial (pre-settling) loose overhand knot centerline, 100 points.

    A cut-open trefoil loop carries the three crossings; straight free
    tails leave the cut radially so the rope ends sit clear of the body.
    """
    rng = np.random.default_rng(seed)
    t = np.linspace(np.pi + OPEN_GAP, 3.0 * np.pi - OPEN_GAP, 600)
    xy = _trefoil_xy(t)
    zc = 0.5 * (1.0 - np.sin(3.0 * t))          # in [0, 1]
    base_z = radius + 0.001

    loop_len = rope_length * (1.0 - 2.0 * TAIL_FRACTION)
    scale = 1.0
    for _ in range(2):
        pts = np.column_stack([xy * scale, base_z + CROSS_CLEARANCE * zc])
        arc = np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1))
        scale *= loop_len / arc

    theta = rng.uniform(0.0, 2.0 * np.pi)
    scale *= 1.0 + rng.uniform(-0.05, 0.05)
    rot = np.array([[np.cos(theta), -np.sin(theta)],
                    [np.sin(theta), np.cos(theta)]])
    xy = (xy * scale) @ rot.T + rng.uniform(-0.05, 0.05, size=2)
    loop = np.column_stack([xy, base_z + CROSS_CLEARANCE * zc])

    centroid = loop[:, :2].mean(axis=0)
    tail_len = rope_length * TAIL_FRACTION
    head = _tail(loop[0, :2], centroid, loop[0, 2], base_z, tail_len)
    tail = _tail(loop[-1, :2], centroid, loop[-1, 2], base_z, tail_len)
    pts = np.vstack([head[::-1], loop, tail])
    return resample_arclength(pts, ParticleState.COUNT).points


def overhand_knot_state(seed: int = 0, rope_length: float = 1.0,
                        material: RodMaterial = None, config: SimConfig = None,
                        settle_time: float = 2.0) -> ParticleState:
    """Settled overhand knot resting on the table; deterministic per seed."""
    material = material or RodMaterial()
    config = config or SimConfig()
    pts = overhand_knot_curve(seed, rope_length, material.radius)
    rod = init_rod(pts, material, config)
    left = GripperState.parked((-2.0, 0.0, 1.0))
    right = GripperState.parked((2.0, 0.0, 1.0))
    for _ in range(int(round(settle_time / config.frame_dt))):
        rod = step_frame(rod, left, right, material, config)
    return ParticleState(rod.positions)
