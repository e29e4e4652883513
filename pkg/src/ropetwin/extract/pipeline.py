"""End-to-end extraction: depth views in, 100 ordered particles out."""

from dataclasses import replace

from ropetwin.errors import TopologyError, UnresolvableJunctionError
from ropetwin.extract.fusion import fuse_views, voxel_downsample
from ropetwin.extract.lift import lift_to_3d, resample_arclength
from ropetwin.extract.ordering import order_and_resolve
from ropetwin.extract.skeleton import skeletonize_2d
from ropetwin.extract.types import DepthScene, ExtractParams, ParticleState

# spurious spurs and unmerged junctions both shrink away under heavier
# pruning; escalate a few times before giving up
PRUNE_GROWTH = 1.6
MAX_ATTEMPTS = 5


def extract(scene: DepthScene, params: ExtractParams = None) -> ParticleState:
    p = (params or ExtractParams()).resolved()
    cloud = voxel_downsample(fuse_views(scene), p.voxel)

    last_error = None
    prune = p.prune_len
    for _ in range(MAX_ATTEMPTS):
        attempt = replace(p, prune_len=prune)
        try:
            skeleton = skeletonize_2d(cloud, attempt)
            path = order_and_resolve(skeleton, cloud, attempt)
            break
        except (TopologyError, UnresolvableJunctionError) as exc:
            last_error = exc
            prune *= PRUNE_GROWTH
    else:
        raise last_error
    polyline = lift_to_3d(path, cloud, p)
    return resample_arclength(polyline, p.n_particles)
