import json
from pathlib import Path

import numpy as np
import pytest

from ropetwin.extract import ParticleState, read_scene
from ropetwin.metrics import evaluate_dataset, overhand_knot_curve
from ropetwin.playback import (ArmTrack, Demonstration, LabeledTrajectory,
                               read_chunk_dir, save_demonstration,
                               save_trajectory)
from ropetwin.shell.cli import main
from ropetwin.shell.stateio import load_state, save_state


def straight_state(length=1.0, height=0.005):
    pts = np.zeros((100, 3))
    pts[:, 0] = np.linspace(0.0, length, 100)
    pts[:, 2] = height
    return ParticleState(pts)


def write_state(path, state):
    save_state(path, state)
    return str(path)


def make_demo_file(path, frames=4, rope_id="ropeA"):
    t = np.arange(frames) / 30.0
    pos = np.tile([-1.0, 0.0, 1.0], (frames, 1))
    quat = np.tile([0.0, 0.0, 0.0, 1.0], (frames, 1))
    opens = np.ones(frames)
    track = ArmTrack(pos, quat, opens)
    rpos = np.tile([1.0, 0.0, 1.0], (frames, 1))
    demo = Demonstration(rope_id, 30.0, t, track,
                         ArmTrack(rpos, quat.copy(), opens.copy()))
    save_demonstration(demo, path)
    return str(path)


def make_traj(demo_id, rope_id, frames, seed):
    rng = np.random.default_rng(seed)
    return LabeledTrajectory(
        demo_id=demo_id, rope_id=rope_id,
        times=np.arange(frames) / 30.0,
        states=rng.normal(size=(frames, 100, 3)),
        left_q=rng.normal(size=(frames, 8)),
        right_q=rng.normal(size=(frames, 8)),
        actions=rng.normal(size=(frames, 16)))


def test_knot_on_straight_state(tmp_path, capsys):
    path = write_state(tmp_path / "s.json", straight_state())
    assert main(["knot", path]) == 0
    assert capsys.readouterr().out.strip() == "crossings=0 untangled=true"


def test_knot_on_overhand_curve(tmp_path, capsys):
    pts = overhand_knot_curve(0)
    path = write_state(tmp_path / "k.json", ParticleState(pts))
    assert main(["knot", path]) == 0
    assert capsys.readouterr().out.strip() == "crossings=3 untangled=false"


def test_knot_missing_file_fails_cleanly(tmp_path, capsys):
    assert main(["knot", str(tmp_path / "absent.json")]) == 1
    assert "error:" in capsys.readouterr().err


def test_state_round_trip(tmp_path):
    state = straight_state()
    path = tmp_path / "s.json"
    save_state(path, state)
    back = load_state(path)
    np.testing.assert_array_equal(back.points, state.points)


def test_render_then_extract(tmp_path, capsys):
    # gentle arc so the skeleton is a single open curve
    s = np.linspace(0.0, 1.0, 100)
    pts = np.column_stack([s, 0.2 * np.sin(np.pi * s),
                           np.full(100, 0.005)])
    src = write_state(tmp_path / "src.json", ParticleState(pts))
    scene_dir = tmp_path / "scene"
    assert main(["render", src, "--views", "2", "-o", str(scene_dir)]) == 0
    assert len(read_scene(scene_dir).views) == 2

    out = tmp_path / "out.json"
    assert main(["extract", str(scene_dir), "-o", str(out)]) == 0
    got = load_state(out)
    assert got.points.shape == (100, 3)
    # every extracted point lies near the true curve
    d = np.linalg.norm(got.points[:, None] - pts[None], axis=2).min(axis=1)
    assert d.mean() < 0.01


def test_replay_twice_byte_identical(tmp_path):
    demo = make_demo_file(tmp_path / "d.demo.jsonl")
    init = write_state(tmp_path / "init.json", straight_state())
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["replay", demo, "--init", init, "-o", str(out_a)]) == 0
    assert main(["replay", demo, "--init", init, "-o", str(out_b)]) == 0
    pa, pb = out_a / "d.traj.npz", out_b / "d.traj.npz"
    assert pa.read_bytes() == pb.read_bytes()


def test_export_and_eval(tmp_path, capsys):
    traj_dir = tmp_path / "trajs"
    traj_dir.mkdir()
    paths = []
    ropes = ["rA", "rA", "rB", "rB", "rB", "rC"]
    for i, rope in enumerate(ropes):
        t = make_traj(f"demo{i}", rope, frames=7, seed=i)
        p = traj_dir / f"demo{i}.traj.npz"
        save_trajectory(t, p)
        paths.append(str(p))

    out = tmp_path / "dataset"
    assert main(["export", *paths, "--k", "2", "--held-out", "rC",
                 "-o", str(out)]) == 0
    line = capsys.readouterr().out
    assert "train=" in line and "test=1" in line
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest) == {"seed", "k", "splits", "held_out_rope"}
    assert manifest["k"] == 2
    assert manifest["held_out_rope"] == "rC"

    report_path = tmp_path / "eval.json"
    assert main(["eval", str(out / "test"), "--baseline", "knn",
                 "--train", str(out / "train"),
                 "-o", str(report_path)]) == 0
    printed = capsys.readouterr().out
    assert printed.startswith("L1: ")
    assert "+/-" in printed
    report = json.loads(report_path.read_text())
    expected = evaluate_dataset(read_chunk_dir(out / "test"),
                                read_chunk_dir(out / "train"))
    assert report["aggregate"] == pytest.approx(expected["aggregate"])
    assert len(report["chunks"]) == expected["aggregate"]["count"]


def test_eval_self_retrieval_prints_zero(tmp_path, capsys):
    traj = make_traj("demoX", "rA", frames=6, seed=3)
    traj_b = make_traj("demoY", "rB", frames=6, seed=4)
    paths = []
    for t in (traj, traj_b):
        p = tmp_path / f"{t.demo_id}.traj.npz"
        save_trajectory(t, p)
        paths.append(str(p))
    out = tmp_path / "ds"
    assert main(["export", *paths, "--k", "2", "--held-out", "rB",
                 "-o", str(out)]) == 0
    capsys.readouterr()
    # score the train split against itself: exact retrieval, l1 = 0
    assert main(["eval", str(out / "train"), "--train",
                 str(out / "train")]) == 0
    assert capsys.readouterr().out.strip() == "L1: 0.00 +/- 0.00 (x 1e-3, n=4)"


def test_simbench_prints_median(capsys):
    assert main(["simbench", "--particles", "20", "--frames", "4"]) == 0
    out = capsys.readouterr().out
    assert out.count("frame") == 4
    assert "median" in out and "ms" in out


def test_usage_errors_exit_2():
    with pytest.raises(SystemExit) as err:
        main(["definitely-not-a-command"])
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        main(["export", "x.npz", "-o", "out"])      # missing --held-out
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        main([])
    assert err.value.code == 2
