"""Path ordering through the skeleton and over/under crossing resolution."""

import numpy as np
from scipy.spatial import cKDTree

from ropetwin.errors import TopologyError, UnresolvableJunctionError
from ropetwin.extract.skeleton import SkeletonGraph
from ropetwin.extract.types import (CenterlinePath, ExtractParams, Layer,
                                    PathCrossing, PointCloud)


def _branch_direction(vp, adj, start, first, span):
    """Unit direction from `start` toward the point `span` arc length into
    the branch entered through neighbor `first` (walking straight through
    degree-2 vertices). Junction-adjacent vertices sit on the chamfered
    part of the medial axis, so a single-edge direction misleads; looking
    several tube widths ahead recovers the strand's true heading."""
    total = float(np.hypot(*(vp[first] - vp[start])))
    prev, cur = start, first
    while total < span:
        nxts = [x for x in adj[cur] if x != prev]
        if len(nxts) != 1:
            break
        prev, cur = cur, nxts[0]
        total += float(np.hypot(*(vp[cur] - vp[prev])))
    step = vp[cur] - vp[start]
    norm = np.hypot(*step)
    return step / norm if norm > 0.0 else None


def _trailing_direction(vp, path, span):
    """Unit direction of the last `span` arc length of the built path."""
    end = vp[path[-1]]
    total = 0.0
    i = len(path) - 1
    while i > 0 and total < span:
        total += float(np.hypot(*(vp[path[i]] - vp[path[i - 1]])))
        i -= 1
    step = end - vp[path[i]]
    norm = np.hypot(*step)
    return step / norm if norm > 0.0 else None


def _traverse(skeleton: SkeletonGraph, deg: np.ndarray, span: float) -> list:
    """Walk endpoint to endpoint, taking the straightest branch at junctions.

    Each undirected edge is used at most once, so an X crossing is passed
    through twice on distinct edge pairs. Straightness compares smoothed
    directions over `span` of arc length on both sides of the junction.
    """
    vp = skeleton.vertices
    ends = np.where(deg == 1)[0]
    a, b = ends
    start = int(a) if tuple(vp[a]) <= tuple(vp[b]) else int(b)

    adj = [sorted(n) for n in skeleton.adjacency()]
    used = set()
    path = [start]
    cur = start
    direction = None
    for _ in range(2 * len(skeleton.edges) + 2):
        cands = [n for n in adj[cur]
                 if (min(cur, n), max(cur, n)) not in used]
        if not cands:
            break
        if direction is None or len(cands) == 1:
            nxt = cands[0]
        else:
            incoming = _trailing_direction(vp, path, span)
            if incoming is None:
                incoming = direction
            best, best_cos = None, -np.inf
            for n in cands:
                bdir = _branch_direction(vp, adj, cur, n, span)
                if bdir is None:
                    continue
                c = float(np.dot(incoming, bdir))
                if c > best_cos + 1e-12:
                    best, best_cos = n, c
            nxt = cands[0] if best is None else best
        used.add((min(cur, nxt), max(cur, nxt)))
        path.append(nxt)
        step = vp[nxt] - vp[cur]
        norm = np.hypot(*step)
        if norm > 0.0:
            direction = step / norm
        cur = nxt
        if deg[cur] == 1:
            break
    if deg[cur] != 1 or cur == start:
        raise TopologyError("path traversal did not reach the far endpoint")
    return path


def _window_indices(path_pts, k, lo, hi):
    """Path indices whose along-path arc distance from index k is in (lo, hi]."""
    out = []
    for direction in (-1, 1):
        dist = 0.0
        i = k
        while 0 <= i + direction < len(path_pts):
            j = i + direction
            dist += float(np.hypot(*(path_pts[j] - path_pts[i])))
            if dist > hi:
                break
            if dist > lo:
                out.append(j)
            i = j
    return out


def _point_at_arc(path_pts, k, direction, arc):
    """Point at along-path arc distance `arc` from vertex k, or None."""
    i = k
    remaining = arc
    while 0 <= i + direction < len(path_pts):
        j = i + direction
        d = float(np.hypot(*(path_pts[j] - path_pts[i])))
        if d >= remaining:
            if d == 0.0:
                return path_pts[i]
            return path_pts[i] + (remaining / d) * (path_pts[j] - path_pts[i])
        remaining -= d
        i = j
    return None


def _passage_height(path_pts, k, tree, zvals, lo, hi, radius):
    """Mean strand height sampled along the path around vertex k.

    Sample locations interpolate the path geometry so the estimate does
    not depend on how densely the skeleton happened to be vertexed; the
    (lo, hi] arc window skips the junction itself, where both strands'
    points overlap in the ground plane.
    """
    samples = []
    for direction in (-1, 1):
        for arc in np.linspace(lo, hi, 4):
            p = _point_at_arc(path_pts, k, direction, arc)
            if p is None:
                continue
            near = tree.query_ball_point(p, radius)
            if near:
                samples.append(float(np.median(zvals[near])))
    if not samples:
        near = tree.query_ball_point(path_pts[k], radius)
        if near:
            return float(np.median(zvals[near]))
        return None
    return float(np.mean(samples))


def order_and_resolve(skeleton: SkeletonGraph, cloud: PointCloud,
                      params: ExtractParams = None) -> CenterlinePath:
    """Order the skeleton into one open path and label crossings over/under.

    The strand whose windowed mean height near the junction is larger
    passes over. Heights come from the 3D cloud; the skeleton itself is
    flat.
    """
    p = (params or ExtractParams()).resolved()
    deg = skeleton.degrees()
    worst = int(deg.max()) if len(deg) else 0
    if worst >= 5:
        raise UnresolvableJunctionError(f"junction of degree {worst}")
    n_ends = int((deg == 1).sum())
    if n_ends != 2:
        raise TopologyError(f"expected 2 endpoints, found {n_ends}")

    path = _traverse(skeleton, deg, p.junction_bridge)
    path_pts = skeleton.vertices[path]

    visits = {}
    for pos, v in enumerate(path):
        if deg[v] == 4:
            visits.setdefault(v, []).append(pos)
    for v, at in visits.items():
        if len(at) != 2:
            raise TopologyError("crossing passed %d times" % len(at))

    tree = cKDTree(cloud.points[:, :2])
    zvals = cloud.points[:, 2]
    layers = np.full(len(path), int(Layer.SURFACE), dtype=np.int8)
    crossings = []
    # ignore cloud points right at the junction where both strands overlap
    exclusion = 2.0 * p.voxel
    for v in sorted(visits):
        i, j = visits[v]
        hi = _passage_height(path_pts, i, tree, zvals, exclusion,
                             p.height_window, 1.5 * p.voxel)
        hj = _passage_height(path_pts, j, tree, zvals, exclusion,
                             p.height_window, 1.5 * p.voxel)
        if hi is None and hj is None:
            first_over = True  # no height evidence either way
        elif hj is None:
            first_over = True
        elif hi is None:
            first_over = False
        else:
            first_over = hi >= hj
        crossings.append(PathCrossing((i, j), (first_over, not first_over)))
        for pos, over in ((i, first_over), (j, not first_over)):
            marked = _window_indices(path_pts, pos, 0.0, p.height_window)
            layer = Layer.OVER if over else Layer.UNDER
            layers[pos] = int(layer)
            for m in marked:
                layers[m] = int(layer)
    return CenterlinePath(path_pts, crossings, layers)
