"""Skeletonization of projected clouds: band, corner, crossing topology."""

import numpy as np
import pytest

from ropetwin.errors import DegenerateInputError
from ropetwin.extract import PointCloud, skeletonize_2d
from tests.synth import l_band, straight_band, x_cross_bands

VOXEL = 0.005


def degree_histogram(graph):
    deg = graph.degrees()
    return {int(d): int((deg == d).sum()) for d in np.unique(deg)}


def test_straight_band_gives_single_path():
    graph = skeletonize_2d(PointCloud(straight_band(length=1.0)))
    hist = degree_histogram(graph)
    assert hist.get(1, 0) == 2
    assert set(hist) == {1, 2}  # no junctions anywhere
    ends = graph.vertices[graph.degrees() == 1]
    d_start = min(np.hypot(*(e - [0.0, 0.0])) for e in ends)
    d_end = min(np.hypot(*(e - [1.0, 0.0])) for e in ends)
    assert d_start < 2 * VOXEL
    assert d_end < 2 * VOXEL
    # the centerline of a straight band is straight: every vertex near y=0
    assert np.abs(graph.vertices[:, 1]).max() < 2 * VOXEL


def test_l_band_single_path_with_corner():
    leg_a, leg_b = 0.5, 0.4
    graph = skeletonize_2d(PointCloud(l_band(leg_a, leg_b)))
    hist = degree_histogram(graph)
    assert hist.get(1, 0) == 2
    assert set(hist) == {1, 2}
    assert graph.total_length() == pytest.approx(leg_a + leg_b, rel=0.05)


def test_crossing_bands_give_one_degree4_node():
    graph = skeletonize_2d(PointCloud(x_cross_bands()))
    hist = degree_histogram(graph)
    assert hist.get(4, 0) == 1
    assert hist.get(1, 0) == 4  # two loose strands
    # the junction sits at the geometric crossing
    node = graph.vertices[graph.degrees() == 4][0]
    assert np.hypot(*node) < 2 * VOXEL


def test_too_few_points_rejected():
    with pytest.raises(DegenerateInputError):
        skeletonize_2d(PointCloud(np.zeros((3, 3))))


def test_collinear_points_rejected():
    pts = np.column_stack([np.linspace(0, 1, 50), np.zeros(50), np.zeros(50)])
    with pytest.raises(DegenerateInputError):
        skeletonize_2d(PointCloud(pts))


def test_sparse_cloud_rejected():
    # points too far apart for the alpha complex: nothing interior remains
    pts = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0],
                    [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]])
    with pytest.raises(DegenerateInputError):
        skeletonize_2d(PointCloud(pts))
