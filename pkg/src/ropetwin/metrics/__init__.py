from .crossings import CrossingRecord, crossings, is_untangled
from .evaluation import (PredictionResult, evaluate_dataset, knn_predict,
                         l1_error, l1_per_step, score_prediction)
from .knots import overhand_knot_curve, overhand_knot_state

__all__ = [
    "CrossingRecord", "PredictionResult", "crossings", "evaluate_dataset",
    "is_untangled", "knn_predict", "l1_error", "l1_per_step",
    "overhand_knot_curve", "overhand_knot_state", "score_prediction",
]
