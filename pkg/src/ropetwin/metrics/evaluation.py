"""Offline action-sequence evaluation and a nearest-neighbor baseline."""

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from ropetwin.errors import DimensionError, NoDataError
from ropetwin.extract.types import ParticleState
from ropetwin.playback import StateActionChunk
from ropetwin.playback.replay import PROPRIO_DIM

# action-row layout: positions and openness may be averaged across
# neighbors, quaternion lanes may not
_QUAT_DIMS = np.array([3, 4, 5, 6, 11, 12, 13, 14])
_LINEAR_DIMS = np.array([0, 1, 2, 7, 8, 9, 10, 15])


@dataclass
class PredictionResult:
    predicted: np.ndarray      # (k, 16)
    ground_truth: np.ndarray   # (k, 16)
    l1: float

    def __post_init__(self):
        self.predicted = np.asarray(self.predicted, dtype=np.float64)
        self.ground_truth = np.asarray(self.ground_truth, dtype=np.float64)
        if self.l1 < 0.0:
            raise ValueError("l1 must be non-negative")


def l1_error(predicted, ground_truth) -> float:
    """Mean absolute difference over the 16 dimensions of the final row."""
    p = np.asarray(predicted, dtype=np.float64)
    g = np.asarray(ground_truth, dtype=np.float64)
    if p.shape != g.shape:
        raise DimensionError(f"shape mismatch {p.shape} vs {g.shape}")
    if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] != PROPRIO_DIM:
        raise DimensionError(f"expected (k, {PROPRIO_DIM}) actions, got {p.shape}")
    return float(np.mean(np.abs(p[-1] - g[-1])))


def l1_per_step(predicted, ground_truth) -> np.ndarray:
    """Secondary diagnostic: the same mean absolute error at every step."""
    p = np.asarray(predicted, dtype=np.float64)
    g = np.asarray(ground_truth, dtype=np.float64)
    if p.shape != g.shape:
        raise DimensionError(f"shape mismatch {p.shape} vs {g.shape}")
    return np.mean(np.abs(p - g), axis=1)


def _distance(state_pts: np.ndarray, q: np.ndarray, chunk: StateActionChunk,
              q_weight: float) -> float:
    d = float(np.mean(np.linalg.norm(state_pts - chunk.state, axis=1)))
    if q_weight != 0.0:
        d += q_weight * float(np.mean(np.abs(q - chunk.q)))
    return d


def knn_predict(state: ParticleState, q, train: Sequence[StateActionChunk],
                neighbors: int = 1, q_weight: float = 0.0) -> np.ndarray:
    """Actions of the nearest training chunk by mean per-particle distance.

    Ties break to the lowest (demo id, frame). With neighbors > 1 the
    position and openness lanes are averaged over the nearest chunks while
    the quaternion lanes are copied from the single nearest one.
    """
    if not train:
        raise NoDataError("empty training set")
    q = np.asarray(q, dtype=np.float64).reshape(PROPRIO_DIM)
    ranked = sorted(
        range(len(train)),
        key=lambda i: (_distance(state.points, q, train[i], q_weight),
                       train[i].demo_id, train[i].frame))
    nearest = train[ranked[0]]
    if neighbors <= 1:
        return nearest.actions.copy()
    chosen = [train[i] for i in ranked[:neighbors]]
    out = nearest.actions.copy()
    out[:, _LINEAR_DIMS] = np.mean(
        [c.actions[:, _LINEAR_DIMS] for c in chosen], axis=0)
    return out


def score_prediction(predicted, ground_truth) -> PredictionResult:
    return PredictionResult(predicted, ground_truth,
                            l1_error(predicted, ground_truth))


def evaluate_dataset(test: Sequence[StateActionChunk],
                     train: Sequence[StateActionChunk],
                     neighbors: int = 1, q_weight: float = 0.0) -> dict:
    """Score every test chunk against its own labels; report per-chunk l1
    plus {mean, std, count}. Layout matches the eval.json interface."""
    if not test:
        raise NoDataError("empty test set")
    rows = []
    for c in test:
        pred = knn_predict(ParticleState(c.state), c.q, train,
                           neighbors=neighbors, q_weight=q_weight)
        rows.append({"demo": c.demo_id, "frame": c.frame,
                     "l1": l1_error(pred, c.actions)})
    vals = np.array([r["l1"] for r in rows])
    return {
        "chunks": rows,
        "aggregate": {"mean": float(vals.mean()), "std": float(vals.std()),
                      "count": int(len(vals))},
    }
