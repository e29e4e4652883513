"""Public simulation operations: constraint evaluation, projection, frame
stepping, grasp bookkeeping, and contact resolution."""

from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from .. import quat
from ..errors import DivergenceError, NumericInputError
from . import kernels
from .types import GripperState, RodMaterial, RodState, SimConfig, REFERENCE_AXIS


def eval_stretch_shear(p_a, p_b, rest_length, u):
    """Stretch-shear residual C = (p_b - p_a)/l0 - d3(u)."""
    p_a = np.asarray(p_a, dtype=np.float64)
    p_b = np.asarray(p_b, dtype=np.float64)
    return (p_b - p_a) / rest_length - quat.rotate(u, REFERENCE_AXIS)


def eval_bend_twist(u_a, u_b, rest):
    """Bend-twist residual Im(conj(u_a) * u_b) - s * Im(rest).

    The sign s in {+1, -1} is the one minimizing the residual norm, which
    resolves the quaternion double cover.
    """
    rel = quat.multiply(quat.conjugate(u_a), u_b)
    r = rel[..., :3]
    d = np.asarray(rest, dtype=np.float64)[..., :3]
    s = np.where(np.sum(r * d, axis=-1, keepdims=True) >= 0.0, 1.0, -1.0)
    return r - s * d


def stretch_residuals(state: RodState) -> np.ndarray:
    """Per-segment stretch-shear residual norms."""
    d3 = quat.rotate(state.orientations, REFERENCE_AXIS)
    c = np.diff(state.positions, axis=0) / state.rest_lengths[:, None] - d3
    return np.linalg.norm(c, axis=1)


def bend_residuals(state: RodState) -> np.ndarray:
    """Per-joint bend-twist residual norms."""
    if state.particle_count < 3:
        return np.zeros(0)
    c = eval_bend_twist(state.orientations[:-1], state.orientations[1:], state.rest_darboux)
    return np.linalg.norm(c, axis=1)


@dataclass
class ConstraintSet:
    """Constraint families for one projection pass over a rod.

    Stretch-shear and bend-twist constraints are implied by the rod
    topology (one per segment / interior joint); attachments pin a
    particle to a world point; collisions adds ground and self contact
    against the given material/config.
    """
    stretch_compliance: float = 0.0
    bend_compliance: float = 0.0
    attachments: Sequence[Tuple[int, np.ndarray]] = ()
    collisions: bool = False
    material: Optional[RodMaterial] = None
    config: Optional[SimConfig] = None


@dataclass
class Multipliers:
    """Accumulated XPBD multipliers, one 3-vector per constraint."""
    stretch: np.ndarray
    bend: np.ndarray
    skipped: int = 0

    @staticmethod
    def zeros(state: RodState):
        s = state.particle_count - 1
        return Multipliers(np.zeros((s, 3)), np.zeros((max(s - 1, 1), 3)), 0)


def xpbd_project(constraints: ConstraintSet, state: RodState, dt_sub: float,
                 multipliers: Optional[Multipliers] = None):
    """One projection pass: all stretch-shear and bend-twist constraints
    solved simultaneously (mass-weighted corrections applied immediately),
    then attachments, then collisions. Compliance enters as
    alpha~ = alpha / dt_sub^2; multipliers accumulate across passes.

    Returns (updated RodState, Multipliers).
    """
    if not dt_sub > 0.0:
        raise ValueError("dt_sub must be positive")
    out = state.copy()
    if multipliers is None:
        multipliers = Multipliers.zeros(state)
    lam_s = multipliers.stretch
    lam_b = multipliers.bend

    x = out.positions
    q = out.orientations
    winv = out.inverse_masses.copy()
    xprev = state.positions.copy()

    for idx, point in constraints.attachments:
        winv[idx] = 0.0
        x[idx] = np.asarray(point, dtype=np.float64)

    s = state.particle_count - 1
    n = 3 * (2 * s - 1)
    band = np.zeros((kernels.HBW + 1, n))
    dvec = np.empty(n)
    rhs = np.empty(n)
    d3 = np.empty((s, 3))
    g = np.empty((max(s - 1, 1), 3, 3))
    dth = np.empty((s, 3))

    alpha_s = constraints.stretch_compliance / (dt_sub * dt_sub)
    alpha_b = constraints.bend_compliance / (dt_sub * dt_sub)
    _, _, skipped = kernels._project_coupled(
        x, q, out.rest_lengths, out.rest_darboux, winv, out.inverse_inertias,
        alpha_s, alpha_b, lam_s, lam_b, band, dvec, rhs, d3, g, dth)
    multipliers.skipped += int(skipped)

    if constraints.collisions:
        material = constraints.material or RodMaterial()
        config = constraints.config or SimConfig()
        if config.ground_enabled:
            kernels._ground_project(x, xprev, winv, material.radius,
                                    config.ground_height, material.ground_friction)
        if config.self_collision:
            pairs = kernels._collect_pairs(x, material.radius, config.collision_margin)
            if pairs.shape[0]:
                kernels._self_collide(x, xprev, winv, pairs, material.radius,
                                      material.self_friction)
    return out, multipliers


def _check_finite(state: RodState, left: GripperState, right: GripperState):
    for arr in (state.positions, state.velocities, state.orientations,
                state.angular_velocities, left.position, left.orientation,
                right.position, right.orientation):
        if not np.all(np.isfinite(arr)):
            raise NumericInputError("non-finite value in simulation input")
    if not (np.isfinite(left.openness) and np.isfinite(right.openness)):
        raise NumericInputError("non-finite gripper openness")


def step_frame(state: RodState, left: GripperState, right: GripperState,
               material: RodMaterial, config: SimConfig) -> RodState:
    """Advance exactly one frame (config.frame_dt) of simulated time.

    Gripper poses are kinematic targets; an attached gripper drags its
    particle along a straight interpolation from the particle's current
    position to the grasp point implied by the target pose. Deterministic:
    identical inputs give bit-identical outputs.
    """
    _check_finite(state, left, right)
    material.validate()
    config.validate()
    out = state.copy()

    pins = []
    for grip in (left, right):
        if grip.attachment is not None:
            idx, _ = grip.attachment
            pins.append((int(idx), grip.grasp_point()))
    pin_idx = np.array([p[0] for p in pins], dtype=np.int64)
    pin_x1 = (np.array([p[1] for p in pins], dtype=np.float64)
              if pins else np.zeros((0, 3)))
    pin_x0 = (out.positions[pin_idx].copy() if pins else np.zeros((0, 3)))

    saved_winv = out.inverse_masses[pin_idx].copy()
    out.inverse_masses[pin_idx] = 0.0
    gx, gy, gz = (float(g) for g in config.gravity)

    status = kernels._step_frame(
        out.positions, out.velocities, out.orientations, out.angular_velocities,
        out.rest_lengths, out.rest_darboux, out.inverse_masses, out.inverse_inertias,
        pin_idx, pin_x0, pin_x1,
        material.radius, material.stretch_shear_compliance,
        material.bend_twist_compliance, material.damping,
        material.ground_friction, material.self_friction,
        gx, gy, gz, config.frame_dt, config.substeps, config.iterations,
        config.ground_height, config.ground_enabled, config.self_collision,
        config.collision_margin)

    out.inverse_masses[pin_idx] = saved_winv
    if status != 0:
        raise DivergenceError("coordinate magnitude exceeded 1e3 m during solve")
    return out


def update_grasp(state: RodState, gripper: GripperState, config: SimConfig) -> GripperState:
    """Hysteresis grasp logic: attach the nearest particle in range when
    openness drops below the close threshold, release when it rises above
    the open threshold. Ties go to the lowest particle index."""
    if gripper.attachment is None:
        if gripper.openness < config.grasp_close_threshold:
            d = np.linalg.norm(state.positions - gripper.position[None, :], axis=1)
            idx = int(np.argmin(d))
            if d[idx] <= config.grasp_radius:
                offset = quat.rotate(quat.conjugate(gripper.orientation),
                                     state.positions[idx] - gripper.position)
                return replace(gripper, attachment=(idx, offset))
        return gripper
    if gripper.openness > config.grasp_open_threshold:
        return replace(gripper, attachment=None)
    return gripper


def resolve_collisions(state: RodState, material: RodMaterial, config: SimConfig) -> np.ndarray:
    """Contact projection of the current positions; returns the per-particle
    position corrections (add to state.positions to get the projected ones).

    Ground: every dynamic particle ends at z >= ground_height + radius.
    Self: every candidate non-adjacent segment pair closer than
    2*radius + collision_margin is pushed to exactly 2*radius separation
    along the mutual closest-point normal, split by inverse mass.
    """
    x = state.positions.copy()
    xprev = state.positions.copy()
    winv = state.inverse_masses
    if config.ground_enabled:
        kernels._ground_project(x, xprev, winv, material.radius,
                                config.ground_height, material.ground_friction)
    if config.self_collision:
        pairs = kernels._collect_pairs(x, material.radius, config.collision_margin)
        if pairs.shape[0]:
            kernels._self_collide(x, xprev, winv, pairs, material.radius,
                                  material.self_friction)
    return x - state.positions


def frame_diagnostics(state: RodState) -> dict:
    """Residual norms and constraint counts for monitoring."""
    sres = stretch_residuals(state)
    bres = bend_residuals(state)
    return {
        "stretch_max": float(np.max(sres)) if sres.size else 0.0,
        "stretch_mean": float(np.mean(sres)) if sres.size else 0.0,
        "bend_max": float(np.max(bres)) if bres.size else 0.0,
        "bend_mean": float(np.mean(bres)) if bres.size else 0.0,
        "segments": int(sres.size),
        "joints": int(bres.size),
    }
