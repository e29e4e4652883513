"""Synthetic depth rendering of a rope as a union of spheres and capsules.

Exact per-pixel ray intersections, not rasterized approximations, so the
renderer can serve as the ground-truth oracle for extraction round trips.
"""

import numpy as np

from ropetwin import quat
from ropetwin.extract.types import CameraModel, DepthScene, DepthView


def _pixel_rect(cam, c, r):
    """Conservative pixel bounding box of a sphere at camera-frame c."""
    z = c[2]
    if z <= r:
        return None
    zn = z - r
    u = cam.cx + cam.fx * c[0] / z
    v = cam.cy + cam.fy * c[1] / z
    ru = cam.fx * r / zn + 1.0
    rv = cam.fy * r / zn + 1.0
    u0 = max(int(np.floor(u - ru)), 0)
    u1 = min(int(np.ceil(u + ru)) + 1, cam.width)
    v0 = max(int(np.floor(v - rv)), 0)
    v1 = min(int(np.ceil(v + rv)) + 1, cam.height)
    if u0 >= u1 or v0 >= v1:
        return None
    return u0, u1, v0, v1


def _ray_dirs(cam, rect):
    u0, u1, v0, v1 = rect
    us = (np.arange(u0, u1) - cam.cx) / cam.fx
    vs = (np.arange(v0, v1) - cam.cy) / cam.fy
    dx, dy = np.meshgrid(us, vs)
    return dx, dy  # dz is identically 1


def _sphere_hits(cam, depth, c, r):
    rect = _pixel_rect(cam, c, r)
    if rect is None:
        return
    dx, dy = _ray_dirs(cam, rect)
    a = dx * dx + dy * dy + 1.0
    b = -2.0 * (dx * c[0] + dy * c[1] + c[2])
    disc = b * b - 4.0 * a * (c @ c - r * r)
    hit = disc >= 0.0
    t = np.where(hit, (-b - np.sqrt(np.where(hit, disc, 0.0))) / (2.0 * a), np.inf)
    t = np.where(t > 0.0, t, np.inf)
    u0, u1, v0, v1 = rect
    sub = depth[v0:v1, u0:u1]
    np.minimum(sub, t, out=sub)


def _cylinder_hits(cam, depth, a3, b3, r):
    axis = b3 - a3
    length = np.linalg.norm(axis)
    if length == 0.0:
        return
    n = axis / length
    ra = _pixel_rect(cam, a3, r)
    rb = _pixel_rect(cam, b3, r)
    if ra is None and rb is None:
        return
    if ra is None:
        ra = rb
    if rb is None:
        rb = ra
    rect = (min(ra[0], rb[0]), max(ra[1], rb[1]),
            min(ra[2], rb[2]), max(ra[3], rb[3]))
    dx, dy = _ray_dirs(cam, rect)

    dn = dx * n[0] + dy * n[1] + n[2]
    an = a3 @ n
    # components of ray dir and offset orthogonal to the axis
    px = dx - dn * n[0]
    py = dy - dn * n[1]
    pz = 1.0 - dn * n[2]
    ox = an * n[0] - a3[0]
    oy = an * n[1] - a3[1]
    oz = an * n[2] - a3[2]
    qa = px * px + py * py + pz * pz
    qb = 2.0 * (px * ox + py * oy + pz * oz)
    qc = ox * ox + oy * oy + oz * oz - r * r
    disc = qb * qb - 4.0 * qa * qc
    ok = (disc >= 0.0) & (qa > 1e-18)
    t = np.where(ok, (-qb - np.sqrt(np.where(ok, disc, 0.0)))
                 / np.where(qa > 1e-18, 2.0 * qa, 1.0), np.inf)
    with np.errstate(invalid="ignore"):  # inf * 0 on miss rows is discarded
        s = t * dn - an  # axial coordinate of the hit, 0..length valid
        t = np.where((t > 0.0) & (s >= 0.0) & (s <= length), t, np.inf)
    u0, u1, v0, v1 = rect
    sub = depth[v0:v1, u0:u1]
    np.minimum(sub, t, out=sub)


def render_depth(centerline: np.ndarray, camera: CameraModel,
                 radius: float) -> DepthView:
    """Render the rope centerline into one masked depth view.

    Stored depth is the camera-frame z of the nearest surface point, the
    quantity that back-projection inverts.
    """
    pts = np.asarray(centerline, dtype=np.float64).reshape(-1, 3)
    cam_pts = camera.to_camera(pts) if len(pts) else pts
    depth = np.full((camera.height, camera.width), np.inf)
    for c in cam_pts:
        _sphere_hits(camera, depth, c, radius)
    for a3, b3 in zip(cam_pts[:-1], cam_pts[1:]):
        _cylinder_hits(camera, depth, a3, b3, radius)
    mask = np.isfinite(depth)
    depth[~mask] = 0.0
    return DepthView(mask, depth, camera)


def look_at_camera(position, target, width=640, height=480, fx=600.0,
                   fy=600.0) -> CameraModel:
    """Camera at `position` with its optical axis through `target`."""
    position = np.asarray(position, dtype=np.float64)
    direction = np.asarray(target, dtype=np.float64) - position
    norm = np.linalg.norm(direction)
    if norm == 0.0:
        direction = np.array([0.0, 0.0, -1.0])
    else:
        direction = direction / norm
    q = quat.from_two_vectors(np.array([0.0, 0.0, 1.0]), direction)
    return CameraModel(fx=fx, fy=fy, cx=width / 2.0, cy=height / 2.0,
                       width=width, height=height, position=position,
                       quaternion=q)


def default_rig(n_views: int, center=(0.5, 0.0, 0.0), distance=0.8) -> list:
    """Standard camera arrangement: one overhead, then oblique views."""
    center = np.asarray(center, dtype=np.float64)
    cams = [look_at_camera(center + [0.0, 0.0, distance], center)]
    azimuths = np.linspace(0.0, 2.0 * np.pi, max(n_views - 1, 1), endpoint=False)
    for az in azimuths[:max(n_views - 1, 0)]:
        offset = distance * np.array([0.6 * np.cos(az), 0.6 * np.sin(az), 0.8])
        cams.append(look_at_camera(center + offset, center))
    return cams[:n_views]


def render_scene(centerline: np.ndarray, cameras: list, radius: float,
                 table_height: float = 0.0) -> DepthScene:
    views = [render_depth(centerline, cam, radius) for cam in cameras]
    return DepthScene(views, table_height)
