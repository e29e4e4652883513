"""Observation-to-state extraction: depth views to ordered particles."""

from ropetwin.extract.fusion import fuse_views, voxel_downsample
from ropetwin.extract.lift import lift_to_3d, resample_arclength
from ropetwin.extract.ordering import order_and_resolve
from ropetwin.extract.pipeline import extract
from ropetwin.extract.render import (default_rig, look_at_camera,
                                     render_depth, render_scene)
from ropetwin.extract.sceneio import read_scene, write_scene
from ropetwin.extract.skeleton import SkeletonGraph, skeletonize_2d
from ropetwin.extract.types import (CameraModel, CenterlinePath, DepthScene,
                                    DepthView, ExtractParams, Layer,
                                    ParticleState, PathCrossing, PointCloud)

__all__ = [
    "CameraModel", "CenterlinePath", "DepthScene", "DepthView",
    "ExtractParams", "Layer", "ParticleState", "PathCrossing", "PointCloud",
    "SkeletonGraph", "default_rig", "extract", "fuse_views", "lift_to_3d",
    "look_at_camera", "order_and_resolve", "read_scene", "render_depth",
    "render_scene", "resample_arclength", "skeletonize_2d",
    "voxel_downsample", "write_scene",
]
