"""Simulation domain types and rod construction."""

from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from .. import quat
from ..errors import InvalidGeometryError

REFERENCE_AXIS = np.array([0.0, 0.0, 1.0])  # segment director d3 at identity orientation


@dataclass
class RodMaterial:
    radius: float = 0.005                 # m
    linear_density: float = 0.05          # kg/m
    stretch_shear_compliance: float = 0.0
    bend_twist_compliance: float = 2.0e3
    damping: float = 0.8                  # 1/s, velocity decay rate
    ground_friction: float = 0.6
    self_friction: float = 0.4

    def validate(self):
        if not self.radius > 0.0:
            raise ValueError("radius must be positive")
        if not self.linear_density > 0.0:
            raise ValueError("linear_density must be positive")
        if self.stretch_shear_compliance < 0.0 or self.bend_twist_compliance < 0.0:
            raise ValueError("compliances must be non-negative")
        if self.damping < 0.0:
            raise ValueError("damping must be non-negative")
        if self.ground_friction < 0.0 or self.self_friction < 0.0:
            raise ValueError("friction coefficients must be non-negative")


@dataclass
class SimConfig:
    frame_dt: float = 1.0 / 30.0
    substeps: int = 20
    iterations: int = 2
    gravity: Tuple[float, float, float] = (0.0, 0.0, -9.81)
    ground_height: float = 0.0
    ground_enabled: bool = True
    self_collision: bool = True
    grasp_radius: float = 0.02
    grasp_close_threshold: float = 0.3
    grasp_open_threshold: float = 0.5
    collision_margin: float = 0.001

    def validate(self):
        if not self.frame_dt > 0.0:
            raise ValueError("frame_dt must be positive")
        if self.substeps < 1 or self.iterations < 1:
            raise ValueError("substeps and iterations must be >= 1")
        if self.grasp_open_threshold < self.grasp_close_threshold:
            raise ValueError("grasp_open_threshold must be >= grasp_close_threshold")


@dataclass
class GripperState:
    position: np.ndarray
    orientation: np.ndarray               # unit quaternion, xyzw
    openness: float = 1.0
    # (particle index, grasp-point offset in the gripper frame) or None
    attachment: Optional[Tuple[int, np.ndarray]] = None

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=np.float64)
        self.orientation = np.asarray(self.orientation, dtype=np.float64)

    def grasp_point(self):
        """World-frame point the attached particle is pinned to."""
        if self.attachment is None:
            return None
        _, offset = self.attachment
        return self.position + quat.rotate(self.orientation, offset)

    @staticmethod
    def parked(position=(0.0, 0.0, 1.0)):
        return GripperState(np.asarray(position, dtype=np.float64), quat.IDENTITY.copy(), 1.0, None)


@dataclass
class RodState:
    positions: np.ndarray          # (P, 3)
    velocities: np.ndarray         # (P, 3)
    orientations: np.ndarray       # (P-1, 4) unit xyzw
    angular_velocities: np.ndarray  # (P-1, 3) body frame
    rest_lengths: np.ndarray       # (P-1,)
    rest_darboux: np.ndarray       # (P-2, 4) relative rest rotation, w >= 0
    inverse_masses: np.ndarray     # (P,)
    inverse_inertias: np.ndarray   # (P-1,) isotropic per segment

    @property
    def particle_count(self):
        return self.positions.shape[0]

    def copy(self):
        return RodState(
            self.positions.copy(), self.velocities.copy(),
            self.orientations.copy(), self.angular_velocities.copy(),
            self.rest_lengths.copy(), self.rest_darboux.copy(),
            self.inverse_masses.copy(), self.inverse_inertias.copy(),
        )

    def validate(self):
        p = self.positions.shape[0]
        checks = [
            (self.positions.shape, (p, 3)),
            (self.velocities.shape, (p, 3)),
            (self.orientations.shape, (p - 1, 4)),
            (self.angular_velocities.shape, (p - 1, 3)),
            (self.rest_lengths.shape, (p - 1,)),
            (self.rest_darboux.shape, (max(p - 2, 0), 4)),
            (self.inverse_masses.shape, (p,)),
            (self.inverse_inertias.shape, (p - 1,)),
        ]
        for got, want in checks:
            if got != want:
                raise ValueError(f"state array shape {got} != expected {want}")
        norms = np.linalg.norm(self.orientations, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-6):
            raise ValueError("orientation quaternion norm drifted beyond 1e-6")
        if np.any(self.rest_lengths <= 0.0):
            raise ValueError("rest_lengths must be positive")
        if np.any(self.inverse_masses < 0.0) or np.any(self.inverse_inertias < 0.0):
            raise ValueError("inverse masses/inertias must be non-negative")

    def arc_length(self):
        return float(np.sum(np.linalg.norm(np.diff(self.positions, axis=0), axis=1)))


def init_rod(centerline, material: RodMaterial, config: SimConfig) -> RodState:
    """Build a rest-state rod whose intrinsic shape is the given centerline.

    Rest lengths are chord lengths; each segment orientation is the minimal
    rotation taking the reference axis (+z) onto the segment direction;
    rest Darboux rotations are the relative rotations between adjacent
    segments, canonicalized to non-negative scalar part.
    """
    material.validate()
    config.validate()
    pts = np.asarray(centerline, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 2:
        raise InvalidGeometryError("centerline needs at least 2 points of 3 coordinates")
    seg = np.diff(pts, axis=0)
    lengths = np.linalg.norm(seg, axis=1)
    if np.any(lengths < 1e-9):
        raise InvalidGeometryError("coincident consecutive centerline points")

    n = pts.shape[0]
    orientations = np.empty((n - 1, 4))
    for i in range(n - 1):
        orientations[i] = quat.from_two_vectors(REFERENCE_AXIS, seg[i] / lengths[i])

    darboux = np.empty((max(n - 2, 0), 4))
    for j in range(n - 2):
        rel = quat.multiply(quat.conjugate(orientations[j]), orientations[j + 1])
        darboux[j] = quat.positive_real(quat.normalize(rel))

    masses = np.zeros(n)
    masses[:-1] += 0.5 * material.linear_density * lengths
    masses[1:] += 0.5 * material.linear_density * lengths

    # thin-cylinder segment inertia, isotropic scalar approximation
    seg_mass = material.linear_density * lengths
    inertia = seg_mass * (lengths ** 2 / 12.0 + material.radius ** 2 / 4.0)

    return RodState(
        positions=pts.copy(),
        velocities=np.zeros((n, 3)),
        orientations=orientations,
        angular_velocities=np.zeros((n - 1, 3)),
        rest_lengths=lengths,
        rest_darboux=darboux,
        inverse_masses=1.0 / masses,
        inverse_inertias=1.0 / inertia,
    )
