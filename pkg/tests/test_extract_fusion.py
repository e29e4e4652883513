"""Back-projection fusion and voxel downsampling."""

import numpy as np
import pytest

from ropetwin.errors import EmptyObservationError, NumericInputError
from ropetwin.extract import (CameraModel, DepthScene, DepthView, PointCloud,
                              fuse_views, voxel_downsample)
from ropetwin import quat


def simple_camera(**kw):
    defaults = dict(fx=100.0, fy=100.0, cx=50.0, cy=50.0, width=101,
                    height=101, position=np.zeros(3),
                    quaternion=np.array([0.0, 0.0, 0.0, 1.0]))
    defaults.update(kw)
    return CameraModel(**defaults)


def single_pixel_view(u=50, v=50, depth=1.0, **cam_kw):
    cam = simple_camera(**cam_kw)
    mask = np.zeros((cam.height, cam.width), dtype=bool)
    d = np.zeros((cam.height, cam.width))
    mask[v, u] = True
    d[v, u] = depth
    return DepthView(mask, d, cam)


def test_principal_point_backprojects_to_axis():
    scene = DepthScene([single_pixel_view(50, 50, 1.0)])
    cloud = fuse_views(scene)
    np.testing.assert_allclose(cloud.points, [[0.0, 0.0, 1.0]], atol=1e-15)


def test_offaxis_pixel_backprojection():
    # pixel (60, 50): u - cx = 10 -> x = 10 * 2.0 / 100 = 0.2
    scene = DepthScene([single_pixel_view(60, 50, 2.0)])
    cloud = fuse_views(scene)
    np.testing.assert_allclose(cloud.points, [[0.2, 0.0, 2.0]], atol=1e-12)


def test_duplicated_view_doubles_points():
    view = single_pixel_view(30, 70, 1.5)
    cloud = fuse_views(DepthScene([view, view]))
    assert len(cloud) == 2
    np.testing.assert_array_equal(cloud.points[0], cloud.points[1])


def test_translation_moves_every_point():
    t = np.array([1.0, -2.0, 3.0])
    base = fuse_views(DepthScene([single_pixel_view(10, 90, 0.7)]))
    moved = fuse_views(DepthScene([single_pixel_view(10, 90, 0.7, position=t)]))
    np.testing.assert_allclose(moved.points, base.points + t, atol=1e-12)


def test_rotated_camera_pose():
    # camera rotated 180 degrees about x: looks along world -z
    q = quat.from_axis_angle(np.array([1.0, 0.0, 0.0]), np.pi)
    pos = np.array([0.0, 0.0, 1.0])
    scene = DepthScene([single_pixel_view(50, 50, 1.0, position=pos, quaternion=q)])
    cloud = fuse_views(scene)
    np.testing.assert_allclose(cloud.points, [[0.0, 0.0, 0.0]], atol=1e-12)


def test_invalid_depth_pixels_skipped():
    cam = simple_camera()
    mask = np.zeros((101, 101), dtype=bool)
    depth = np.zeros((101, 101))
    mask[50, 50] = True   # depth 0: invalid
    mask[50, 51] = True
    depth[50, 51] = -1.0  # negative: invalid
    mask[50, 52] = True
    depth[50, 52] = np.nan
    mask[50, 53] = True
    depth[50, 53] = 2.0   # the only valid one
    cloud = fuse_views(DepthScene([DepthView(mask, depth, cam)]))
    assert len(cloud) == 1


def test_empty_union_raises():
    cam = simple_camera()
    view = DepthView(np.zeros((101, 101), dtype=bool), np.zeros((101, 101)), cam)
    with pytest.raises(EmptyObservationError):
        fuse_views(DepthScene([view]))
    with pytest.raises(EmptyObservationError):
        fuse_views(DepthScene([]))


def test_downsample_same_voxel_centroid():
    cloud = PointCloud(np.array([[0.0, 0.0, 0.0], [0.001, 0.0, 0.0]]))
    out = voxel_downsample(cloud, 0.005)
    np.testing.assert_allclose(out.points, [[0.0005, 0.0, 0.0]], atol=1e-15)


def test_downsample_preserves_distant_points():
    cloud = PointCloud(np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]))
    out = voxel_downsample(cloud, 0.005)
    assert len(out) == 2


def test_downsample_cube_corners_stay():
    corners = np.array([[x, y, z] for x in (0.0, 0.01)
                        for y in (0.0, 0.01) for z in (0.0, 0.01)])
    out = voxel_downsample(PointCloud(corners), 0.005)
    assert len(out) == 8


def test_downsample_against_dict_oracle():
    rng = np.random.default_rng(7)
    pts = rng.uniform(-0.2, 0.2, size=(500, 3))
    voxel = 0.03
    buckets = {}
    for p in pts:
        key = tuple(np.floor(p / voxel).astype(int))
        buckets.setdefault(key, []).append(p)
    expected = sorted(tuple(np.mean(v, axis=0)) for v in buckets.values())
    out = voxel_downsample(PointCloud(pts), voxel)
    got = sorted(tuple(p) for p in out.points)
    np.testing.assert_allclose(got, expected, atol=1e-12)


def test_downsample_rejects_bad_voxel():
    with pytest.raises(NumericInputError):
        voxel_downsample(PointCloud(np.zeros((1, 3))), 0.0)
