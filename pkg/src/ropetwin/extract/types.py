"""Observation and state types for centerline extraction."""

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from ropetwin.errors import InvalidGeometryError
from ropetwin import quat


@dataclass
class CameraModel:
    """Pinhole camera: intrinsics in pixels, camera-to-world pose.

    The camera looks along its local +z axis; a pixel (u, v) at depth z
    back-projects to ((u - cx) * z / fx, (v - cy) * z / fy, z) in the
    camera frame.
    """

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    position: np.ndarray
    quaternion: np.ndarray  # xyzw, camera-to-world

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=np.float64)
        self.quaternion = np.asarray(self.quaternion, dtype=np.float64)
        if min(self.fx, self.fy) <= 0.0:
            raise InvalidGeometryError("focal lengths must be positive")
        if self.width <= 0 or self.height <= 0:
            raise InvalidGeometryError("image dimensions must be positive")

    def to_world(self, points_cam: np.ndarray) -> np.ndarray:
        return quat.rotate(self.quaternion, points_cam) + self.position

    def to_camera(self, points_world: np.ndarray) -> np.ndarray:
        return quat.rotate(quat.conjugate(self.quaternion),
                           points_world - self.position)

    def project(self, points_world: np.ndarray):
        """World points -> (pixel coords (N,2), camera-frame depth (N,))."""
        pc = np.atleast_2d(self.to_camera(points_world))
        z = pc[:, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            u = self.cx + self.fx * pc[:, 0] / z
            v = self.cy + self.fy * pc[:, 1] / z
        return np.column_stack([u, v]), z


@dataclass
class DepthView:
    mask: np.ndarray   # (H, W) bool, true where the rope is visible
    depth: np.ndarray  # (H, W) meters along the camera z axis
    camera: CameraModel

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)
        self.depth = np.asarray(self.depth, dtype=np.float64)
        if self.mask.shape != self.depth.shape:
            raise InvalidGeometryError("mask and depth shapes differ")
        if self.mask.shape != (self.camera.height, self.camera.width):
            raise InvalidGeometryError("raster shape does not match camera")


@dataclass
class DepthScene:
    views: list
    table_height: float = 0.0


@dataclass
class PointCloud:
    points: np.ndarray  # (N, 3) world frame

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)

    def __len__(self):
        return len(self.points)


class Layer(IntEnum):
    SURFACE = 0
    OVER = 1
    UNDER = 2


@dataclass
class PathCrossing:
    """One self-intersection: two passages of the path through one node."""

    indices: tuple  # (first path index, second path index)
    over: tuple     # over flag per passage; exactly one true

    def __post_init__(self):
        if sum(bool(o) for o in self.over) != 1:
            raise InvalidGeometryError("exactly one passage must be over")


@dataclass
class CenterlinePath:
    vertices: np.ndarray          # (K, 2) ordered points on the table plane
    crossings: list = field(default_factory=list)
    layers: np.ndarray = None     # (K,) Layer values

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 2)
        if self.layers is None:
            self.layers = np.full(len(self.vertices), int(Layer.SURFACE), dtype=np.int8)
        else:
            self.layers = np.asarray(self.layers, dtype=np.int8)
        if len(self.layers) != len(self.vertices):
            raise InvalidGeometryError("layers length must match vertices")


@dataclass
class ParticleState:
    """Canonical rope state: exactly 100 ordered points in the world frame."""

    points: np.ndarray
    COUNT = 100

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.points.shape != (self.COUNT, 3):
            raise InvalidGeometryError(
                f"expected ({self.COUNT}, 3) points, got {self.points.shape}")
        if not np.all(np.isfinite(self.points)):
            raise InvalidGeometryError("non-finite particle coordinates")


@dataclass
class ExtractParams:
    """Tuning for the extraction pipeline. Lengths are meters.

    Thresholds default to multiples of the voxel size so a single knob
    rescales the whole pipeline.
    """

    voxel: float = 0.005
    rope_radius: float = 0.005
    n_particles: int = 100
    alpha: float = None            # default 2 * voxel
    merge_radius: float = None     # default voxel / 2
    junction_merge: float = None   # default 2 * voxel
    junction_bridge: float = None  # default 7 * voxel
    prune_len: float = None        # default 3 * voxel
    height_window: float = None    # default 5 * voxel
    lift_radius: float = None      # default 2 * voxel

    def resolved(self) -> "ExtractParams":
        v = self.voxel
        return ExtractParams(
            voxel=v,
            rope_radius=self.rope_radius,
            n_particles=self.n_particles,
            alpha=2.0 * v if self.alpha is None else self.alpha,
            merge_radius=0.5 * v if self.merge_radius is None else self.merge_radius,
            junction_merge=2.0 * v if self.junction_merge is None else self.junction_merge,
            junction_bridge=7.0 * v if self.junction_bridge is None else self.junction_bridge,
            prune_len=3.0 * v if self.prune_len is None else self.prune_len,
            height_window=5.0 * v if self.height_window is None else self.height_window,
            lift_radius=2.0 * v if self.lift_radius is None else self.lift_radius,
        )
