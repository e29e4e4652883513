"""End-to-end extraction on rendered scenes with known ground truth."""

import numpy as np
import pytest

from ropetwin.extract import (ExtractParams, default_rig, extract,
                              render_scene)

RADIUS = 0.005
VOXEL = 0.005


def chain_distance(points, chain):
    """Mean distance from each point to the nearest chain segment."""
    seg = np.diff(chain, axis=0)
    seglen2 = np.einsum("ij,ij->i", seg, seg)
    total = 0.0
    for p in points:
        rel = p - chain[:-1]
        t = np.clip(np.einsum("ij,ij->i", rel, seg) / seglen2, 0, 1)
        d = np.linalg.norm(rel - t[:, None] * seg, axis=1)
        total += d.min()
    return total / len(points)


def straight_truth():
    x = np.linspace(0.2, 0.8, 100)
    return np.column_stack([x, np.zeros(100), np.full(100, RADIUS)])


def test_straight_rope_round_trip():
    truth = straight_truth()
    scene = render_scene(truth, default_rig(2), RADIUS)
    state = extract(scene)
    assert state.points.shape == (100, 3)
    assert chain_distance(state.points, truth) < 2 * VOXEL
    # arc ordering survives: endpoints near the true rope ends, either way
    d0 = min(np.linalg.norm(state.points[0] - truth[0]),
             np.linalg.norm(state.points[0] - truth[-1]))
    assert d0 < 4 * VOXEL


def test_curved_rope_round_trip():
    t = np.linspace(0, 1, 120)
    truth = np.column_stack([
        0.2 + 0.6 * t,
        0.12 * np.sin(2.5 * np.pi * t),
        np.full(120, RADIUS)])
    scene = render_scene(truth, default_rig(3), RADIUS)
    state = extract(scene)
    assert chain_distance(state.points, truth) < 2 * VOXEL


def test_translation_equivariance_within_voxel():
    truth = straight_truth()
    shift = np.array([0.137, -0.082, 0.0])
    base_scene = render_scene(truth, default_rig(2), RADIUS)
    rig = default_rig(2)
    for cam in rig:
        cam.position = cam.position + shift
    moved_scene = render_scene(truth + shift, rig, RADIUS)

    base = extract(base_scene).points
    moved = extract(moved_scene).points
    if np.linalg.norm(moved[0] - (base[0] + shift)) > \
       np.linalg.norm(moved[-1] - (base[0] + shift)):
        moved = moved[::-1]
    assert np.abs(moved - (base + shift)).max() < VOXEL + 1e-9


def test_uniform_spacing_invariant_end_to_end():
    # exact source-arc uniformity (1e-9) is asserted at the resampler;
    # end to end, chord lengths only match arc lengths up to the tiny
    # wiggle the skeleton leaves in the lifted polyline
    truth = straight_truth()
    scene = render_scene(truth, default_rig(2), RADIUS)
    pts = extract(scene).points
    gaps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    assert gaps.std() / gaps.mean() < 1e-3
