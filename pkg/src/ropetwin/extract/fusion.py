"""Multi-view depth fusion and voxel downsampling."""

import numpy as np

from ropetwin.errors import EmptyObservationError, NumericInputError
from ropetwin.extract.types import DepthScene, PointCloud


def fuse_views(scene: DepthScene) -> PointCloud:
    """Back-project every masked valid pixel of every view into one cloud.

    Pixels with non-positive or non-finite depth are skipped. Points are
    emitted in view order, row-major within a view, so the result is
    deterministic.
    """
    if not scene.views:
        raise EmptyObservationError("scene has no views")
    chunks = []
    for view in scene.views:
        cam = view.camera
        valid = view.mask & np.isfinite(view.depth) & (view.depth > 0.0)
        v_idx, u_idx = np.nonzero(valid)
        if len(v_idx) == 0:
            continue
        z = view.depth[v_idx, u_idx]
        x = (u_idx - cam.cx) * z / cam.fx
        y = (v_idx - cam.cy) * z / cam.fy
        chunks.append(cam.to_world(np.column_stack([x, y, z])))
    if not chunks:
        raise EmptyObservationError("no masked pixels with valid depth")
    return PointCloud(np.concatenate(chunks, axis=0))


def voxel_downsample(cloud: PointCloud, voxel: float) -> PointCloud:
    """One point per occupied voxel: the centroid of the voxel's members."""
    if voxel <= 0.0:
        raise NumericInputError("voxel size must be positive")
    pts = cloud.points
    if len(pts) == 0:
        return PointCloud(pts.copy())
    idx = np.floor(pts / voxel).astype(np.int64)
    # group rows by voxel index; unique() sorts, which fixes output order
    _, inverse, counts = np.unique(idx, axis=0, return_inverse=True,
                                   return_counts=True)
    inverse = inverse.reshape(-1)  # shape differs across numpy versions
    sums = np.zeros((len(counts), 3))
    np.add.at(sums, inverse, pts)
    return PointCloud(sums / counts[:, None])
