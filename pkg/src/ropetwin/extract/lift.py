"""Lift the 2D path to 3D using cloud heights, then resample to N particles."""

import numpy as np
from scipy.spatial import cKDTree

from ropetwin.errors import DegenerateInputError, LiftingError
from ropetwin.extract.types import (CenterlinePath, ExtractParams, Layer,
                                    ParticleState, PointCloud)


def _cluster_height(heights: np.ndarray, layer: int, gap: float):
    """Height estimate for one vertex from its neighborhood z samples.

    Two separated height clusters mean two strands share this column;
    the layer decides which cluster this vertex belongs to. An under
    vertex with a single cluster is occluded (only the strand above it
    is visible), so it reports no height and lets path interpolation
    fill it from its own strand.
    """
    hs = np.sort(heights)
    if len(hs) > 1:
        gaps = np.diff(hs)
        split = int(np.argmax(gaps))
        if gaps[split] > gap:
            lower, upper = hs[:split + 1], hs[split + 1:]
            if layer == int(Layer.OVER):
                return float(upper.mean())
            # surface vertices rest on the table, same as under
            return float(lower.mean())
    if layer == int(Layer.UNDER):
        return None
    return float(hs.mean())


def lift_to_3d(path: CenterlinePath, cloud: PointCloud,
               params: ExtractParams = None) -> np.ndarray:
    """3D polyline over the path vertices; z from nearby cloud points.

    Vertices with no cloud support (occluded under a crossing) get z
    interpolated along the path from the nearest resolved neighbors.
    """
    p = (params or ExtractParams()).resolved()
    verts = path.vertices
    tree = cKDTree(cloud.points[:, :2])
    zvals = cloud.points[:, 2]
    diameter = 2.0 * p.rope_radius

    z = np.full(len(verts), np.nan)
    for i, v in enumerate(verts):
        near = tree.query_ball_point(v, p.lift_radius)
        if near:
            h = _cluster_height(zvals[near], int(path.layers[i]), diameter)
            if h is not None:
                z[i] = h
    resolved = np.where(np.isfinite(z))[0]
    if len(resolved) == 0:
        raise LiftingError("no path vertex has nearby cloud points")

    if len(resolved) < len(verts):
        # arc-length coordinate along the path for interpolation weights
        seg = np.linalg.norm(np.diff(verts, axis=0), axis=1)
        s = np.concatenate([[0.0], np.cumsum(seg)])
        z = np.interp(s, s[resolved], z[resolved])
    return np.column_stack([verts, z])


def resample_arclength(polyline: np.ndarray, n: int = 100) -> ParticleState:
    """n points uniformly spaced in arc length along the polyline.

    Endpoints are preserved exactly. Computed in a canonical orientation
    (lexicographically smaller end first) so that reversing the input
    reverses the output bit for bit.
    """
    pts = np.asarray(polyline, dtype=np.float64).reshape(-1, 3)
    if len(pts) < 2:
        raise DegenerateInputError("polyline needs at least 2 points")
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    pts = np.concatenate([pts[:1], pts[1:][seg > 0.0]])  # drop duplicates
    if len(pts) < 2:
        raise DegenerateInputError("polyline has zero total length")

    flipped = False
    for a, b in zip(pts[0], pts[-1]):
        if a != b:
            flipped = a > b
            break
    work = pts[::-1] if flipped else pts

    seg = np.linalg.norm(np.diff(work, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    targets = np.arange(n) * (total / (n - 1))
    j = np.clip(np.searchsorted(cum, targets, side="right") - 1, 0, len(seg) - 1)
    frac = (targets - cum[j]) / seg[j]
    out = work[j] + frac[:, None] * (work[j + 1] - work[j])
    out[0] = work[0]
    out[-1] = work[-1]
    if flipped:
        out = out[::-1]
    return ParticleState(np.ascontiguousarray(out))
