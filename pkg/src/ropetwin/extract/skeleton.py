"""Centerline skeleton from a 2D projection of the rope point cloud.

The medial axis is approximated with a boundary Voronoi diagram: build
the alpha complex of the projected points, take the sample points on its
boundary, and keep the Voronoi vertices/edges of those boundary points
that fall inside the complex. Interior Voronoi vertices of a shape's
boundary samples converge to its medial axis, so a rope-shaped band
yields its centerline and crossings yield small junction clusters that
the merge step collapses to single degree-4 nodes.
"""

from collections import defaultdict
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay, Voronoi, QhullError

from ropetwin.errors import DegenerateInputError
from ropetwin.extract.types import ExtractParams, PointCloud


@dataclass
class SkeletonGraph:
    vertices: np.ndarray  # (V, 2)
    edges: np.ndarray     # (E, 2) int, each row sorted, rows unique

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 2)
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(len(self.vertices), dtype=np.int64)
        np.add.at(deg, self.edges.ravel(), 1)
        return deg

    def adjacency(self) -> list:
        adj = [[] for _ in range(len(self.vertices))]
        for a, b in self.edges:
            adj[a].append(int(b))
            adj[b].append(int(a))
        return adj

    def total_length(self) -> float:
        if len(self.edges) == 0:
            return 0.0
        d = self.vertices[self.edges[:, 0]] - self.vertices[self.edges[:, 1]]
        return float(np.linalg.norm(d, axis=1).sum())


def _circumradii(pts: np.ndarray, simplices: np.ndarray) -> np.ndarray:
    pa = pts[simplices[:, 0]]
    pb = pts[simplices[:, 1]]
    pc = pts[simplices[:, 2]]
    a = np.linalg.norm(pb - pc, axis=1)
    b = np.linalg.norm(pa - pc, axis=1)
    c = np.linalg.norm(pa - pb, axis=1)
    area2 = np.abs((pb[:, 0] - pa[:, 0]) * (pc[:, 1] - pa[:, 1])
                   - (pc[:, 0] - pa[:, 0]) * (pb[:, 1] - pa[:, 1]))
    out = np.full(len(simplices), np.inf)
    ok = area2 > 1e-15
    out[ok] = a[ok] * b[ok] * c[ok] / (2.0 * area2[ok])
    return out


def _boundary_point_indices(simplices, in_alpha, n_points):
    """Sample points on alpha-complex boundary edges (edges used once)."""
    tri = simplices[in_alpha]
    e = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
    e.sort(axis=1)
    packed = e[:, 0].astype(np.int64) * n_points + e[:, 1]
    uniq, counts = np.unique(packed, return_counts=True)
    on_boundary = uniq[counts == 1]
    return np.unique(np.concatenate([on_boundary // n_points,
                                     on_boundary % n_points]))


def _merge_close(verts, edges, radius, only_junctions=False):
    """Union-find merge of vertices within radius; positions become means."""
    n = len(verts)
    parent = np.arange(n)

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    deg = np.zeros(n, dtype=np.int64)
    if len(edges):
        np.add.at(deg, edges.ravel(), 1)
    cells = defaultdict(list)
    keys = np.floor(verts / radius).astype(np.int64)
    for i, (kx, ky) in enumerate(keys):
        cells[(kx, ky)].append(i)
    for i in range(n):
        kx, ky = keys[i]
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for j in cells.get((kx + dx, ky + dy), ()):
                    if j <= i:
                        continue
                    if only_junctions and (deg[i] < 3 or deg[j] < 3):
                        continue
                    if np.hypot(*(verts[j] - verts[i])) < radius:
                        parent[find(i)] = find(j)

    groups = defaultdict(list)
    for i in range(n):
        groups[find(i)].append(i)
    new_index = np.empty(n, dtype=np.int64)
    new_verts = []
    for _, members in sorted(groups.items()):
        new_index[members] = len(new_verts)
        new_verts.append(verts[members].mean(axis=0))
    if len(edges):
        remapped = new_index[edges]
        keep = remapped[:, 0] != remapped[:, 1]
        remapped = remapped[keep]
        remapped.sort(axis=1)
        edges = np.unique(remapped, axis=0)
    return np.array(new_verts), edges


def _contract_bridges(verts, edges, max_bridge):
    """Collapse short junction-to-junction chains into single vertices.

    A wide or shallow-angle crossing skeletonizes into two degree-3 nodes
    joined by a chain whose length scales with tube width over the
    crossing angle's sine; contracting any junction-to-junction chain
    shorter than max_bridge recovers the single degree-4 crossing node.
    Distinct crossings stay apart because the rope between them is an
    order of magnitude longer than the tube width.
    """
    while True:
        n = len(verts)
        if n == 0 or len(edges) == 0:
            return verts, edges
        deg = np.zeros(n, dtype=np.int64)
        np.add.at(deg, edges.ravel(), 1)
        adj = defaultdict(list)
        for a, b in edges:
            adj[int(a)].append(int(b))
            adj[int(b)].append(int(a))

        chain = None
        for j in np.nonzero(deg >= 3)[0]:
            for nb in adj[int(j)]:
                walk = [int(j), int(nb)]
                length = float(np.hypot(*(verts[nb] - verts[j])))
                prev, cur = int(j), int(nb)
                while deg[cur] == 2 and length <= max_bridge:
                    nxt = [x for x in adj[cur] if x != prev][0]
                    length += float(np.hypot(*(verts[nxt] - verts[cur])))
                    prev, cur = cur, nxt
                    walk.append(cur)
                if deg[cur] >= 3 and cur != j and length <= max_bridge:
                    chain = walk
                    break
            if chain is not None:
                break
        if chain is None:
            return verts, edges

        keep = chain[0]
        center = 0.5 * (verts[chain[0]] + verts[chain[-1]])
        remap = np.arange(n)
        remap[chain] = keep
        verts = verts.copy()
        verts[keep] = center
        remapped = remap[edges]
        remapped = remapped[remapped[:, 0] != remapped[:, 1]]
        remapped.sort(axis=1)
        edges = np.unique(remapped, axis=0)
        used = np.unique(edges.ravel())
        compact = np.full(n, -1, dtype=np.int64)
        compact[used] = np.arange(len(used))
        verts, edges = verts[used], compact[edges]


def _prune_leaves(verts, edges, prune_len):
    """Iteratively remove leaf branches shorter than prune_len."""
    edge_set = {(int(a), int(b)) for a, b in edges}
    while True:
        adj = defaultdict(list)
        for a, b in edge_set:
            adj[a].append(b)
            adj[b].append(a)
        deg = {v: len(ns) for v, ns in adj.items()}
        removed_any = False
        for leaf in sorted(v for v, d in deg.items() if d == 1):
            if deg.get(leaf, 0) != 1:
                continue  # already consumed by an earlier removal
            path = [leaf]
            cur, prev = leaf, -1
            length = 0.0
            while True:
                nxt = [v for v in adj[cur] if v != prev]
                if len(nxt) != 1:
                    break
                prev, cur = cur, nxt[0]
                length += float(np.hypot(*(verts[cur] - verts[prev])))
                path.append(cur)
                if deg[cur] != 2:
                    break
            if length < prune_len and len(path) > 1:
                for a, b in zip(path[:-1], path[1:]):
                    edge_set.discard((min(a, b), max(a, b)))
                    adj[a].remove(b)
                    adj[b].remove(a)
                    deg[a] -= 1
                    deg[b] -= 1
                removed_any = True
        if not removed_any:
            break
    if not edge_set:
        return verts[:0], np.zeros((0, 2), dtype=np.int64)
    edges = np.array(sorted(edge_set), dtype=np.int64)
    used = np.unique(edges.ravel())
    remap = np.full(len(verts), -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    return verts[used], remap[edges]


def skeletonize_2d(cloud: PointCloud, params: ExtractParams = None) -> SkeletonGraph:
    """Project the cloud onto the table plane and extract its centerline graph."""
    p = (params or ExtractParams()).resolved()
    pts = np.unique(cloud.points[:, :2], axis=0)
    if len(pts) < 4:
        raise DegenerateInputError("need at least 4 distinct projected points")
    try:
        tri = Delaunay(pts)
    except QhullError as exc:
        raise DegenerateInputError(f"degenerate projected cloud: {exc}") from exc

    in_alpha = _circumradii(pts, tri.simplices) <= p.alpha
    if not in_alpha.any():
        raise DegenerateInputError("alpha complex is empty; voxel/alpha mismatch")
    bidx = _boundary_point_indices(tri.simplices, in_alpha, len(pts))
    if len(bidx) < 4:
        raise DegenerateInputError("fewer than 4 boundary samples")

    vor = Voronoi(pts[bidx])
    vv = vor.vertices
    simp_of = tri.find_simplex(vv)
    keep = (simp_of >= 0) & in_alpha[np.clip(simp_of, 0, None)]

    ridge = np.asarray(vor.ridge_vertices, dtype=np.int64)
    finite = (ridge[:, 0] >= 0) & (ridge[:, 1] >= 0)
    ridge = ridge[finite]
    ridge = ridge[keep[ridge[:, 0]] & keep[ridge[:, 1]]]
    if len(ridge) == 0:
        raise DegenerateInputError("no interior medial edges")
    ridge.sort(axis=1)
    ridge = np.unique(ridge, axis=0)

    used = np.unique(ridge.ravel())
    remap = np.full(len(vv), -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    verts = vv[used]
    edges = remap[ridge]

    verts, edges = _merge_close(verts, edges, p.merge_radius)
    # junction clusters: a crossing shows up as several nearby degree-3
    # vertices; collapsing them yields the single degree-4 node we want
    verts, edges = _merge_close(verts, edges, p.junction_merge, only_junctions=True)
    verts, edges = _contract_bridges(verts, edges, p.junction_bridge)
    verts, edges = _prune_leaves(verts, edges, p.prune_len)
    if len(edges) == 0:
        raise DegenerateInputError("skeleton vanished after pruning")
    return SkeletonGraph(verts, edges)
