"""PELT change-point detection over term frequency series."""

import logging
import math
from typing import Dict, List, Literal, Optional, Sequence, Set

import numpy as np
from pydantic import BaseModel, Field

from app.core.analysis.lemmatizer import Lemmatizer
from app.core.analysis.trends import term_series
from app.core.classifier.text import ngrams, tokenize
from app.core.errors import ChangePointError
from app.core.extraction import visible_text
from app.core.models import Interval, PolicyDocument

logger = logging.getLogger(__name__)

_PRUNE_TOLERANCE = 1e-12


class ChangePointConfig(BaseModel):
    penalty: Optional[float] = Field(None, gt=0)
    cost: Literal["l2_mean"] = "l2_mean"
    min_doc_freq: float = Field(0.01, ge=0, le=1)


def l2_mean_cost(segment: np.ndarray) -> float:
    return float(((segment - segment.mean()) ** 2).sum())


def default_penalty(series: Sequence[float]) -> float:
    values = np.asarray(series, dtype=float)
    return 2.0 * math.log(len(values)) * float(np.var(values))


def pelt_changepoints(series: Sequence[float], config: Optional[ChangePointConfig] = None) -> List[int]:
    """Start indices of every segment but the first in the optimal segmentation.

    Minimizes the summed segment cost plus `penalty` per change point,
    pruning candidates that can no longer be optimal.
    """
    config = config or ChangePointConfig()
    values = np.asarray(series, dtype=float)
    n = len(values)
    if n < 2:
        raise ChangePointError(f"Change-point detection needs at least 2 points, got {n}")
    penalty = config.penalty if config.penalty is not None else default_penalty(values)
    if penalty <= 0:
        return []

    best = np.empty(n + 1)
    best[0] = -penalty
    last_change = [[] for _ in range(n + 1)]
    candidates = [0]
    for t in range(1, n + 1):
        costs = [best[tau] + l2_mean_cost(values[tau:t]) for tau in candidates]
        choice = int(np.argmin([cost + penalty for cost in costs]))
        best[t] = costs[choice] + penalty
        tau_star = candidates[choice]
        last_change[t] = last_change[tau_star] + [tau_star]
        candidates = [tau for tau, cost in zip(candidates, costs) if cost <= best[t] + _PRUNE_TOLERANCE]
        candidates.append(t)
    return [tau for tau in last_change[n] if tau > 0]


def lemmatized_ngrams(markdown: str, n: int, lemmatizer: Lemmatizer) -> Set[str]:
    lemmas = [lemmatizer(token) for token in tokenize(visible_text(markdown))]
    return set(ngrams(lemmas, n))


def term_changepoints(
    documents: Sequence[PolicyDocument], n: int, config: ChangePointConfig, lemmatizer: Lemmatizer
) -> Dict[str, List[Interval]]:
    """Change-point intervals of every frequent lemmatized n-gram."""
    per_document = [(d.interval, lemmatized_ngrams(d.markdown, n, lemmatizer)) for d in documents]
    result = {}
    for series in term_series(per_document, config.min_doc_freq):
        intervals = sorted(series.frequencies)
        if len(intervals) < 2:
            continue
        result[series.term] = [intervals[i] for i in pelt_changepoints(series.values(), config)]
    return result


def changepoint_concentration(
    documents: Sequence[PolicyDocument],
    n: int,
    config: Optional[ChangePointConfig] = None,
    lemmatizer: Optional[Lemmatizer] = None,
) -> Dict[Interval, int]:
    """Number of term change points falling in each interval."""
    config = config or ChangePointConfig()
    lemmatizer = lemmatizer or Lemmatizer()
    counts = {interval: 0 for interval in sorted({d.interval for d in documents})}
    changes = term_changepoints(documents, n, config, lemmatizer)
    for intervals in changes.values():
        for interval in intervals:
            counts[interval] += 1
    logger.info(f"{sum(counts.values())} change points over {len(changes)} {n}-gram series")
    return counts
