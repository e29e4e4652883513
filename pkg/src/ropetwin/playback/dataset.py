"""Chunked state-action datasets: extraction, splitting, on-disk layout.

Chunk file (.chunks.jsonl): one object per line,
{"demo":str,"frame":int,"state":[[x,y,z]*100],"q":[16],"actions":[[16]*k]}.
Dataset directory: train/ val/ test/ each holding one chunk file per demo,
plus manifest.json {"seed","k","splits":{"train","val","test"},"held_out_rope"}.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np

from ropetwin.errors import SplitError

from .replay import PROPRIO_DIM, LabeledTrajectory

# train:val proportion for the non-held-out demos
VAL_FRACTION = 15.0 / 79.0


@dataclass
class StateActionChunk:
    demo_id: str
    frame: int              # start frame index within the source trajectory
    state: np.ndarray       # (100, 3)
    q: np.ndarray           # (16,) proprioception at the start frame
    actions: np.ndarray     # (k, 16) targets applied over the next k frames

    def __post_init__(self):
        self.state = np.asarray(self.state, dtype=np.float64)
        self.q = np.asarray(self.q, dtype=np.float64).reshape(PROPRIO_DIM)
        self.actions = np.asarray(self.actions, dtype=np.float64).reshape(
            -1, PROPRIO_DIM)


class ChunkList(list):
    """List of chunks; too_short marks a trajectory shorter than one chunk."""

    def __init__(self, items=(), too_short: bool = False):
        super().__init__(items)
        self.too_short = too_short


def extract_chunks(traj: LabeledTrajectory, k: int = 20,
                   stride: int = 1) -> ChunkList:
    """Sliding windows: chunk at start i holds the state and proprioception
    of frame i and the actions applied at frames i+1 .. i+k. For stride 1
    that yields max(0, frame_count - k) chunks."""
    if k < 1 or stride < 1:
        raise ValueError("k and stride must be >= 1")
    t = traj.frame_count
    if t < k + 1:
        return ChunkList([], too_short=True)
    chunks = ChunkList()
    for i in range(0, t - k, stride):
        chunks.append(StateActionChunk(
            demo_id=traj.demo_id, frame=i,
            state=traj.states[i].copy(),
            q=np.concatenate([traj.left_q[i], traj.right_q[i]]),
            actions=traj.actions[i + 1:i + 1 + k].copy()))
    return chunks


def write_chunks(path, chunks: Sequence[StateActionChunk]) -> None:
    with open(Path(path), "w") as f:
        for c in chunks:
            f.write(json.dumps({
                "demo": c.demo_id, "frame": c.frame,
                "state": c.state.tolist(), "q": c.q.tolist(),
                "actions": c.actions.tolist()}) + "\n")


def read_chunks(path) -> List[StateActionChunk]:
    out = []
    with open(Path(path)) as f:
        for raw in f:
            if not raw.strip():
                continue
            obj = json.loads(raw)
            out.append(StateActionChunk(
                demo_id=obj["demo"], frame=int(obj["frame"]),
                state=obj["state"], q=obj["q"], actions=obj["actions"]))
    return out


def read_chunk_dir(path) -> List[StateActionChunk]:
    """All chunks under a split directory, ordered by filename then line."""
    out = []
    for f in sorted(Path(path).glob("*.chunks.jsonl")):
        out.extend(read_chunks(f))
    return out


def split_demos(demo_ropes: Dict[str, str], held_out_rope: str, seed: int,
                val_fraction: float = VAL_FRACTION):
    """Partition demo ids: every demo of the held-out rope is test; the rest
    are shuffled by a seeded generator and cut into train/val."""
    test = sorted(d for d, r in demo_ropes.items() if r == held_out_rope)
    if not test:
        raise SplitError(f"held-out rope {held_out_rope!r} matches no demo")
    rest = sorted(d for d in demo_ropes if d not in set(test))
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(rest))
    n_val = int(round(len(rest) * val_fraction))
    val = sorted(rest[i] for i in order[:n_val])
    train = sorted(rest[i] for i in order[n_val:])
    return {"train": train, "val": val, "test": test}


def export_dataset(trajectories: Sequence[LabeledTrajectory],
                   held_out_rope: str, out_dir, k: int = 20, stride: int = 1,
                   seed: int = 0, val_fraction: float = VAL_FRACTION) -> dict:
    by_id = {}
    for traj in trajectories:
        if traj.demo_id in by_id:
            raise SplitError(f"duplicate demo id {traj.demo_id!r}")
        by_id[traj.demo_id] = traj
    splits = split_demos({d: t.rope_id for d, t in by_id.items()},
                         held_out_rope, seed, val_fraction)

    out_dir = Path(out_dir)
    for split, ids in splits.items():
        sub = out_dir / split
        sub.mkdir(parents=True, exist_ok=True)
        for demo_id in ids:
            write_chunks(sub / f"{demo_id}.chunks.jsonl",
                         extract_chunks(by_id[demo_id], k=k, stride=stride))

    manifest = {"seed": seed, "k": k, "splits": splits,
                "held_out_rope": held_out_rope}
    with open(out_dir / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return manifest
