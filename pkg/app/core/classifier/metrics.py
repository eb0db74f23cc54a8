import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)


def _arrays(scores: Sequence[float], labels: Sequence) -> Tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(bool)
    if s.shape != y.shape:
        raise ValueError("scores and labels must have the same length")
    return s, y


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="mergesort")
    sorted_values = values[order]
    ranks = np.empty(len(values), dtype=np.float64)
    start = 0
    while start < len(values):
        end = start
        while end + 1 < len(values) and sorted_values[end + 1] == sorted_values[start]:
            end += 1
        ranks[order[start:end + 1]] = (start + end) / 2.0 + 1.0
        start = end + 1
    return ranks


def auc(scores: Sequence[float], labels: Sequence) -> float:
    """Probability that a random positive outscores a random negative, ties half.

    Uses the rank-sum (Mann-Whitney) form, so it is exact and O(n log n).
    """
    s, y = _arrays(scores, labels)
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs at least one positive and one negative label")
    ranks = _average_ranks(s)
    u = ranks[y].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def precision_recall(scores: Sequence[float], labels: Sequence, threshold: float) -> Tuple[Optional[float], float]:
    s, y = _arrays(scores, labels)
    predicted = s >= threshold
    tp = int((predicted & y).sum())
    n_predicted = int(predicted.sum())
    precision = tp / n_predicted if n_predicted else None
    recall = tp / int(y.sum()) if y.any() else 0.0
    return precision, recall


def roc_points(scores: Sequence[float], labels: Sequence) -> List[Tuple[float, float, float]]:
    """(threshold, false positive rate, true positive rate), highest threshold first."""
    s, y = _arrays(scores, labels)
    n_pos, n_neg = int(y.sum()), int((~y).sum())
    points = [(float("inf"), 0.0, 0.0)]
    for threshold in sorted(set(s.tolist()), reverse=True):
        predicted = s >= threshold
        tpr = (predicted & y).sum() / n_pos if n_pos else 0.0
        fpr = (predicted & ~y).sum() / n_neg if n_neg else 0.0
        points.append((float(threshold), float(fpr), float(tpr)))
    return points


def select_threshold_from_scores(scores: Sequence[float], labels: Sequence, min_precision: float = 0.97) -> float:
    """Smallest score threshold whose precision reaches `min_precision`.

    When no threshold gets there, the one with the highest precision is
    returned, preferring the smaller (higher recall) one among equals.
    """
    s, y = _arrays(scores, labels)
    if not y.any():
        raise ValueError("Threshold selection needs at least one positive example")
    best = None
    for threshold in sorted(set(s.tolist())):
        precision, recall = precision_recall(s, y, threshold)
        if precision is None:
            continue
        if precision >= min_precision:
            return float(threshold)
        if best is None or precision > best[0]:
            best = (precision, recall, threshold)
    logger.warning(f"Precision {min_precision} is not attainable; best is {best[0]:.3f} at {best[2]}")
    return float(best[2])
