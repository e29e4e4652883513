import json

import numpy as np
import pytest
from scipy.spatial.transform import Rotation, Slerp

from ropetwin.errors import (DemoOrderingError, DemoParseError,
                             DemoValidationError, TooShortError)
from ropetwin.playback import (ArmTrack, Demonstration, load_demonstration,
                               resample_demo, save_demonstration)

IDENT = [0.0, 0.0, 0.0, 1.0]


def frame_line(t, lpos=(0, 0, 0), lquat=IDENT, lopen=1.0,
               rpos=(1, 0, 0), rquat=IDENT, ropen=1.0):
    return json.dumps({
        "t": t,
        "left": {"pos": list(lpos), "quat": list(lquat), "open": lopen},
        "right": {"pos": list(rpos), "quat": list(rquat), "open": ropen},
    })


def write_demo(path, lines, rope_id="ropeA", rate_hz=100.0):
    meta = json.dumps({"format": "demo-v1", "rope_id": rope_id,
                       "rate_hz": rate_hz})
    path.write_text("\n".join([meta] + lines) + "\n")


def make_demo(times, rate_hz, rope_id="ropeA", lquat=None, lpos=None):
    times = np.asarray(times, dtype=np.float64)
    f = len(times)
    if lquat is None:
        lquat = np.tile(IDENT, (f, 1))
    if lpos is None:
        lpos = np.zeros((f, 3))
    track_l = ArmTrack(lpos, lquat, np.ones(f))
    track_r = ArmTrack(np.tile([1.0, 0, 0], (f, 1)), np.tile(IDENT, (f, 1)),
                       np.ones(f))
    return Demonstration(rope_id=rope_id, rate_hz=rate_hz, times=times,
                         left=track_l, right=track_r, demo_id="demo_test")


def test_load_round_trip(tmp_path):
    p = tmp_path / "a.demo.jsonl"
    write_demo(p, [frame_line(0.0), frame_line(0.01, lpos=(0.1, 0.2, 0.3)),
                   frame_line(0.02, lopen=0.25)])
    demo = load_demonstration(p)
    assert demo.rope_id == "ropeA"
    assert demo.rate_hz == 100.0
    assert demo.demo_id == "a"
    assert demo.frame_count == 3
    np.testing.assert_array_equal(demo.times, [0.0, 0.01, 0.02])
    np.testing.assert_array_equal(demo.left.positions[1], [0.1, 0.2, 0.3])
    assert demo.left.openness[2] == 0.25

    q = tmp_path / "b.demo.jsonl"
    save_demonstration(demo, q)
    again = load_demonstration(q, demo_id=demo.demo_id)
    np.testing.assert_array_equal(again.times, demo.times)
    np.testing.assert_array_equal(again.left.positions, demo.left.positions)
    np.testing.assert_array_equal(again.left.orientations,
                                  demo.left.orientations)
    np.testing.assert_array_equal(again.right.openness, demo.right.openness)


def test_malformed_frame_reports_line_number(tmp_path):
    p = tmp_path / "bad.demo.jsonl"
    write_demo(p, [frame_line(0.0), "{not json", frame_line(0.02)])
    with pytest.raises(DemoParseError) as exc:
        load_demonstration(p)
    assert exc.value.line == 3


def test_missing_field_reports_line_number(tmp_path):
    p = tmp_path / "bad.demo.jsonl"
    line = json.loads(frame_line(0.01))
    del line["left"]["quat"]
    write_demo(p, [frame_line(0.0), json.dumps(line)])
    with pytest.raises(DemoParseError) as exc:
        load_demonstration(p)
    assert exc.value.line == 3


def test_bad_metadata_is_line_one(tmp_path):
    p = tmp_path / "bad.demo.jsonl"
    p.write_text(json.dumps({"format": "other", "rope_id": "x",
                             "rate_hz": 30}) + "\n")
    with pytest.raises(DemoParseError) as exc:
        load_demonstration(p)
    assert exc.value.line == 1


def test_second_metadata_line_rejected(tmp_path):
    p = tmp_path / "bad.demo.jsonl"
    meta = json.dumps({"format": "demo-v1", "rope_id": "x", "rate_hz": 30})
    write_demo(p, [frame_line(0.0), meta])
    with pytest.raises(DemoParseError) as exc:
        load_demonstration(p)
    assert exc.value.line == 3


def test_non_increasing_times_rejected(tmp_path):
    p = tmp_path / "bad.demo.jsonl"
    write_demo(p, [frame_line(0.0), frame_line(0.02), frame_line(0.02)])
    with pytest.raises(DemoOrderingError):
        load_demonstration(p)


def test_slightly_denormalized_quaternion_renormalized(tmp_path):
    p = tmp_path / "a.demo.jsonl"
    q = [0.0, 0.0, 0.0, 1.0 + 5e-4]
    write_demo(p, [frame_line(0.0, lquat=q), frame_line(0.01, lquat=q)])
    demo = load_demonstration(p)
    norms = np.linalg.norm(demo.left.orientations, axis=1)
    np.testing.assert_allclose(norms, 1.0, atol=1e-12)


def test_badly_denormalized_quaternion_rejected(tmp_path):
    p = tmp_path / "a.demo.jsonl"
    q = [0.0, 0.0, 0.0, 1.01]
    write_demo(p, [frame_line(0.0), frame_line(0.01, lquat=q)])
    with pytest.raises(DemoValidationError):
        load_demonstration(p)


def test_openness_outside_unit_interval_rejected(tmp_path):
    p = tmp_path / "a.demo.jsonl"
    write_demo(p, [frame_line(0.0), frame_line(0.01, ropen=1.2)])
    with pytest.raises(DemoValidationError):
        load_demonstration(p)


def test_resample_constant_demo_frame_count():
    # 1 second at 100 Hz -> 31 frames at 30 Hz (t = 0 .. 1 inclusive)
    demo = make_demo(np.arange(101) / 100.0, rate_hz=100.0)
    out = resample_demo(demo, target_hz=30.0)
    assert out.frame_count == 31
    assert out.rate_hz == 30.0
    assert out.rope_id == demo.rope_id
    np.testing.assert_allclose(out.times, np.arange(31) / 30.0, atol=1e-12)
    np.testing.assert_array_equal(out.left.positions, np.zeros((31, 3)))


def test_resample_halfway_rotation():
    # 90 degrees about z over [0, 1]; the sample at t = 0.5 must sit at
    # 45 degrees: (0, 0, sin(pi/8), cos(pi/8))
    q0 = np.array([0.0, 0.0, 0.0, 1.0])
    q1 = np.array([0.0, 0.0, np.sin(np.pi / 4), np.cos(np.pi / 4)])
    demo = make_demo([0.0, 1.0], rate_hz=2.0, lquat=np.stack([q0, q1]))
    out = resample_demo(demo, target_hz=2.0)
    assert out.frame_count == 3
    expected = np.array([0.0, 0.0, np.sin(np.pi / 8), np.cos(np.pi / 8)])
    np.testing.assert_allclose(out.left.orientations[1], expected, atol=1e-12)


def test_resample_positions_linear():
    demo = make_demo([0.0, 1.0], rate_hz=4.0,
                     lpos=np.array([[0.0, 0, 0], [1.0, 2.0, -4.0]]))
    out = resample_demo(demo, target_hz=4.0)
    np.testing.assert_allclose(out.left.positions[:, 0],
                               [0.0, 0.25, 0.5, 0.75, 1.0], atol=1e-15)
    np.testing.assert_allclose(out.left.positions[:, 2],
                               [0.0, -1.0, -2.0, -3.0, -4.0], atol=1e-14)


def test_resample_idempotent_at_source_rate():
    rng = np.random.default_rng(7)
    times = np.arange(40) / 30.0
    quats = rng.normal(size=(40, 4))
    quats /= np.linalg.norm(quats, axis=1, keepdims=True)
    pos = rng.normal(size=(40, 3))
    demo = make_demo(times, rate_hz=30.0, lquat=quats, lpos=pos)
    out = resample_demo(demo, target_hz=30.0)
    assert out.frame_count == 40
    np.testing.assert_allclose(out.times, times, atol=1e-9)
    np.testing.assert_allclose(out.left.positions, pos, atol=1e-9)
    np.testing.assert_allclose(out.left.orientations, quats, atol=1e-9)


def test_resample_matches_reference_slerp():
    rng = np.random.default_rng(3)
    times = np.sort(rng.uniform(0.0, 2.0, size=12))
    times[0], times[-1] = 0.0, 2.0
    quats = rng.normal(size=(12, 4))
    quats /= np.linalg.norm(quats, axis=1, keepdims=True)
    demo = make_demo(times, rate_hz=30.0, lquat=quats)
    out = resample_demo(demo, target_hz=30.0)

    oracle = Slerp(times, Rotation.from_quat(quats))
    want = oracle(np.clip(out.times, times[0], times[-1])).as_quat()
    got = out.left.orientations
    # orientation equality up to global sign per sample
    sign = np.where(np.sum(got * want, axis=1) < 0.0, -1.0, 1.0)
    np.testing.assert_allclose(got * sign[:, None], want, atol=1e-9)


def test_resample_single_frame_too_short():
    demo = make_demo([0.0], rate_hz=30.0)
    with pytest.raises(TooShortError):
        resample_demo(demo)
