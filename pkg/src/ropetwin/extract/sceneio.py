"""Scene directory serialization.

Layout: per view `view_<i>.mask.pgm` (binary P5, 255 marks rope pixels),
`view_<i>.depth.f32` (little-endian float32, row-major), and
`view_<i>.camera.json`; one `scene.json` with the table height and the
view count.
"""

import json
from pathlib import Path

import numpy as np

from ropetwin.errors import DemoParseError
from ropetwin.extract.types import CameraModel, DepthScene, DepthView


def _write_pgm(path: Path, mask: np.ndarray) -> None:
    h, w = mask.shape
    data = np.where(mask, 255, 0).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(data.tobytes())


def _read_pgm(path: Path) -> np.ndarray:
    raw = path.read_bytes()
    if not raw.startswith(b"P5"):
        raise DemoParseError(f"{path.name}: not a binary P5 file")
    # header = magic, width, height, maxval as whitespace-separated tokens,
    # with optional '#' comment lines
    tokens = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            while pos < len(raw) and raw[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        tokens.append(raw[start:pos])
    pos += 1  # single whitespace after maxval
    w, h, maxval = (int(t) for t in tokens)
    if maxval != 255:
        raise DemoParseError(f"{path.name}: expected maxval 255, got {maxval}")
    pixels = np.frombuffer(raw, dtype=np.uint8, count=w * h, offset=pos)
    return (pixels.reshape(h, w) > 127)


def write_scene(directory, scene: DepthScene) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for i, view in enumerate(scene.views):
        cam = view.camera
        _write_pgm(directory / f"view_{i}.mask.pgm", view.mask)
        (directory / f"view_{i}.depth.f32").write_bytes(
            view.depth.astype("<f4").tobytes())
        (directory / f"view_{i}.camera.json").write_text(json.dumps({
            "fx": cam.fx, "fy": cam.fy, "cx": cam.cx, "cy": cam.cy,
            "width": cam.width, "height": cam.height,
            "position": [float(x) for x in cam.position],
            "quaternion_xyzw": [float(x) for x in cam.quaternion],
        }, indent=2))
    (directory / "scene.json").write_text(json.dumps({
        "table_height": scene.table_height,
        "views": len(scene.views),
    }, indent=2))


def read_scene(directory) -> DepthScene:
    directory = Path(directory)
    meta_path = directory / "scene.json"
    if not meta_path.is_file():
        raise DemoParseError(f"missing {meta_path}")
    meta = json.loads(meta_path.read_text())
    views = []
    for i in range(int(meta["views"])):
        cam_meta = json.loads((directory / f"view_{i}.camera.json").read_text())
        cam = CameraModel(
            fx=float(cam_meta["fx"]), fy=float(cam_meta["fy"]),
            cx=float(cam_meta["cx"]), cy=float(cam_meta["cy"]),
            width=int(cam_meta["width"]), height=int(cam_meta["height"]),
            position=np.array(cam_meta["position"], dtype=np.float64),
            quaternion=np.array(cam_meta["quaternion_xyzw"], dtype=np.float64))
        mask = _read_pgm(directory / f"view_{i}.mask.pgm")
        raw = (directory / f"view_{i}.depth.f32").read_bytes()
        expected = cam.width * cam.height * 4
        if len(raw) != expected:
            raise DemoParseError(
                f"view_{i}.depth.f32: {len(raw)} bytes, expected {expected}")
        depth = np.frombuffer(raw, dtype="<f4").astype(np.float64)
        views.append(DepthView(mask, depth.reshape(cam.height, cam.width), cam))
    return DepthScene(views, float(meta["table_height"]))
