"""Solver timing harness behind the `simbench` subcommand."""
import time

import numpy as np

from ropetwin.playback import PARK_LEFT, PARK_RIGHT
from ropetwin.rodsim import GripperState, RodMaterial, SimConfig, init_rod, \
    step_frame


def stretch_residual(rod) -> float:
    lengths = np.linalg.norm(np.diff(rod.positions, axis=0), axis=1)
    return float(np.abs(lengths / rod.rest_lengths - 1.0).max())


def run_bench(n_particles: int = 100, n_frames: int = 300):
    """Step a resting rope n_frames times; per-frame wall time and residual.

    Returns (times_ms, residuals) arrays. The first frames include JIT
    warmup; report medians, not means.
    """
    material, config = RodMaterial(), SimConfig()
    pts = np.zeros((n_particles, 3))
    pts[:, 0] = np.linspace(0.0, 1.0, n_particles)
    pts[:, 2] = material.radius
    rod = init_rod(pts, material, config)
    left = GripperState.parked(PARK_LEFT)
    right = GripperState.parked(PARK_RIGHT)

    times_ms = np.empty(n_frames)
    residuals = np.empty(n_frames)
    for i in range(n_frames):
        t0 = time.perf_counter()
        rod = step_frame(rod, left, right, material, config)
        times_ms[i] = (time.perf_counter() - t0) * 1e3
        residuals[i] = stretch_residual(rod)
    return times_ms, residuals
