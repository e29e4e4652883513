"""Projected crossing analysis of a rope state.

A crossing is a transversal intersection, in the top-down (vertical)
projection, between two non-adjacent rope segments. The strand with the
larger z at its own intersection parameter passes over.
"""

from dataclasses import dataclass
from typing import List

import numpy as np

from ropetwin.extract.types import ParticleState

MERGE_EPS = 1e-9      # endpoint-duplicate merge radius, meters (projected)


@dataclass
class CrossingRecord:
    seg_a: int
    seg_b: int
    point: np.ndarray      # (2,) projected location
    sign: int              # orientation determinant, over direction first
    over: str              # "a" or "b": which strand passes above

    def __post_init__(self):
        self.point = np.asarray(self.point, dtype=np.float64).reshape(2)
        if abs(self.seg_a - self.seg_b) < 2:
            raise ValueError("crossing segments must be non-adjacent")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.over not in ("a", "b"):
            raise ValueError("over must be 'a' or 'b'")


def _pair_intersections(pts: np.ndarray):
    """All transversal projected intersections between non-adjacent segments.

    Returns (ia, ib, t, u, px, py) arrays; ia < ib, parameters in [0, 1].
    """
    xy = pts[:, :2]
    d = np.diff(xy, axis=0)                       # (S, 2)
    s = len(d)
    ia, ib = np.triu_indices(s, k=2)
    da, db = d[ia], d[ib]
    denom = da[:, 0] * db[:, 1] - da[:, 1] * db[:, 0]
    rel = xy[ib] - xy[ia]
    # transversal only: near-parallel pairs (collinear runs of the rope
    # itself) produce 0/0 parameters, not crossings
    transversal = np.abs(denom) > 1e-9 * np.linalg.norm(da, axis=1) \
        * np.linalg.norm(db, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (rel[:, 0] * db[:, 1] - rel[:, 1] * db[:, 0]) / denom
        u = (rel[:, 0] * da[:, 1] - rel[:, 1] * da[:, 0]) / denom
    ok = transversal & (t >= 0.0) & (t <= 1.0) & (u >= 0.0) & (u <= 1.0)
    ia, ib, t, u = ia[ok], ib[ok], t[ok], u[ok]
    px = xy[ia, 0] + t * d[ia, 0]
    py = xy[ia, 1] + t * d[ia, 1]
    return ia, ib, t, u, px, py


def crossings(state: ParticleState) -> List[CrossingRecord]:
    pts = state.points
    ia, ib, t, u, px, py = _pair_intersections(pts)
    z = pts[:, 2]
    za = z[ia] * (1.0 - t) + z[ia + 1] * t
    zb = z[ib] * (1.0 - u) + z[ib + 1] * u
    dirs = np.diff(pts[:, :2], axis=0)
    cross = dirs[ia, 0] * dirs[ib, 1] - dirs[ia, 1] * dirs[ib, 0]

    order = np.lexsort((ib, ia))
    out: List[CrossingRecord] = []
    for idx in order:
        p = np.array([px[idx], py[idx]])
        dup = False
        for kept in out:
            # the same geometric crossing re-reported through a shared
            # vertex of an adjacent segment collapses to the lower index
            if (abs(kept.seg_a - int(ia[idx])) <= 1
                    and abs(kept.seg_b - int(ib[idx])) <= 1
                    and np.linalg.norm(kept.point - p) <= MERGE_EPS):
                dup = True
                break
        if dup:
            continue
        over = "a" if za[idx] > zb[idx] else "b"
        # crossing sign orders the determinant (over, under): det > 0 is a
        # positive crossing, the convention under which a trefoil's three
        # crossings all agree
        det_ab = cross[idx] if over == "a" else -cross[idx]
        out.append(CrossingRecord(
            seg_a=int(ia[idx]), seg_b=int(ib[idx]), point=p,
            sign=1 if det_ab > 0.0 else -1, over=over))
    return out


def is_untangled(state: ParticleState) -> bool:
    """True iff the top-down projection has no crossings. Conservative:
    incidental overlaps count as crossings even when no knot exists."""
    return len(crossings(state)) == 0
