"""Command-line entry point: one subcommand per pipeline stage."""
import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from ropetwin.errors import RopetwinError
from ropetwin.extract import (default_rig, extract, read_scene, render_scene,
                              write_scene)
from ropetwin.metrics import crossings, evaluate_dataset, is_untangled
from ropetwin.playback import (load_demonstration, load_trajectory,
                               read_chunk_dir, replay, resample_demo,
                               save_trajectory, export_dataset)
from ropetwin.rodsim import RodMaterial, SimConfig
from ropetwin.shell.bench import run_bench
from ropetwin.shell.stateio import load_state, save_state


def _cmd_extract(args) -> int:
    scene = read_scene(args.scene_dir)
    state = extract(scene)
    save_state(args.output, state)
    print(f"wrote {args.output} ({state.points.shape[0]} particles)")
    return 0


def _cmd_replay(args) -> int:
    material, config = RodMaterial(), SimConfig()
    demo = load_demonstration(args.demo)
    demo = resample_demo(demo, 1.0 / config.frame_dt)
    init = load_state(args.init)
    traj = replay(demo, init, material, config)
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{traj.demo_id}.traj.npz"
    save_trajectory(traj, path)
    print(f"wrote {path} ({traj.frame_count} frames)")
    return 0


def _cmd_export(args) -> int:
    trajs = [load_trajectory(p) for p in args.trajectories]
    manifest = export_dataset(trajs, args.held_out, args.output,
                              k=args.k, seed=args.seed)
    counts = {name: len(ids) for name, ids in manifest["splits"].items()}
    print(f"wrote {args.output} "
          f"(train={counts['train']} val={counts['val']} "
          f"test={counts['test']})")
    return 0


def _cmd_eval(args) -> int:
    test = read_chunk_dir(args.test_dir)
    train = read_chunk_dir(args.train)
    report = evaluate_dataset(test, train)
    agg = report["aggregate"]
    if args.output:
        Path(args.output).write_text(
            json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(f"L1: {agg['mean'] * 1e3:.2f} +/- {agg['std'] * 1e3:.2f} "
          f"(x 1e-3, n={agg['count']})")
    return 0


def _cmd_knot(args) -> int:
    state = load_state(args.state)
    found = crossings(state)
    flag = "true" if is_untangled(state) else "false"
    print(f"crossings={len(found)} untangled={flag}")
    return 0


def _cmd_render(args) -> int:
    state = load_state(args.state)
    center = state.points.mean(axis=0) * np.array([1.0, 1.0, 0.0])
    cameras = default_rig(args.views, center=tuple(center))
    scene = render_scene(state.points, cameras, args.radius)
    write_scene(args.output, scene)
    print(f"wrote {args.output} ({args.views} views)")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from ropetwin.shell.server import ServeSettings, build_app

    settings = ServeSettings(preset=args.preset,
                             record_dir=Path(args.record_dir))
    app = build_app(settings)
    try:
        uvicorn.run(app, host=args.host, port=args.port,
                    log_level="warning")
    except OSError as exc:                      # port already bound
        print(f"error: cannot listen on port {args.port}: {exc}",
              file=sys.stderr)
        return 1
    return 0


def _cmd_simbench(args) -> int:
    times_ms, residuals = run_bench(args.particles, args.frames)
    for i in range(len(times_ms)):
        print(f"frame {i:4d}: {times_ms[i]:7.3f} ms  "
              f"residual {residuals[i]:.3e}")
    print(f"median {np.median(times_ms):.3f} ms  "
          f"max residual {residuals.max():.3e}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ropetwin",
        description="rope digital twin: simulate, extract, label, evaluate")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="depth scene directory -> state.json")
    p.add_argument("scene_dir")
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("replay", help="demo file -> labeled trajectory")
    p.add_argument("demo")
    p.add_argument("--init", required=True, help="initial state.json")
    p.add_argument("-o", "--output", required=True, help="trajectory dir")

    p = sub.add_parser("export", help="trajectories -> chunked dataset")
    p.add_argument("trajectories", nargs="+")
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--held-out", required=True, dest="held_out",
                   help="rope id reserved for the test split")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("eval", help="score a baseline on a test split")
    p.add_argument("test_dir")
    p.add_argument("--baseline", choices=["knn"], default="knn")
    p.add_argument("--train", required=True)
    p.add_argument("-o", "--output", help="write eval.json here")

    p = sub.add_parser("knot", help="crossing count of a state file")
    p.add_argument("state")

    p = sub.add_parser("render", help="state.json -> synthetic depth scene")
    p.add_argument("state")
    p.add_argument("--views", type=int, default=2)
    p.add_argument("--radius", type=float, default=RodMaterial().radius)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("serve", help="run the realtime teleop service")
    p.add_argument("--port", type=int,
                   default=int(os.environ.get("ROPETWIN_PORT", "8765")))
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--preset", default="straight")
    p.add_argument("--record-dir", default=".", dest="record_dir")

    p = sub.add_parser("simbench", help="per-frame solver time and residual")
    p.add_argument("--particles", type=int, default=100)
    p.add_argument("--frames", type=int, default=300)

    return parser


_DISPATCH = {
    "extract": _cmd_extract,
    "replay": _cmd_replay,
    "export": _cmd_export,
    "eval": _cmd_eval,
    "knot": _cmd_knot,
    "render": _cmd_render,
    "serve": _cmd_serve,
    "simbench": _cmd_simbench,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except RopetwinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
