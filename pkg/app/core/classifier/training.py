"""Model fitting, selection and persistence for the policy classifier."""

import hashlib
import itertools
import json
import logging
from typing import FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from app.core.classifier.features import (
    DocumentTerms,
    Vocabulary,
    build_vocabulary,
    feature_matrix,
    featurize,
)
from app.core.classifier.forest import RandomForest
from app.core.classifier.logistic import LogisticRegression
from app.core.classifier.metrics import auc, precision_recall, roc_points, select_threshold_from_scores
from app.core.errors import TrainingError
from app.core.models import LabeledExample, PolicyDocument

logger = logging.getLogger(__name__)

RANDOM_FOREST = "random_forest"
LOGISTIC_REGRESSION = "logistic_regression"
MODEL_KINDS = (RANDOM_FOREST, LOGISTIC_REGRESSION)


class Model(BaseModel):
    kind: str
    vocabulary: Vocabulary
    hyperparameters: dict = Field(default_factory=dict)
    parameters: dict
    threshold: float = 0.5
    seed: int = 0
    training_digest: str = ""

    def estimator(self):
        if self.kind == RANDOM_FOREST:
            return RandomForest.from_parameters(self.parameters)
        if self.kind == LOGISTIC_REGRESSION:
            return LogisticRegression.from_parameters(self.parameters)
        raise TrainingError(f"Unknown model kind: {self.kind}")

    def score_matrix(self, X: np.ndarray) -> np.ndarray:
        if X.shape[0] == 0:
            return np.zeros(0)
        return self.estimator().predict_proba(X)


def hyperparameter_grid(kind: str, settings) -> List[dict]:
    if kind == RANDOM_FOREST:
        return [
            {"trees": trees, "max_depth": depth, "min_leaf": leaf}
            for trees, depth, leaf in itertools.product(settings.grid_trees, settings.grid_max_depth, settings.grid_min_leaf)
        ]
    if kind == LOGISTIC_REGRESSION:
        return [{"l2": l2} for l2 in settings.grid_l2]
    raise TrainingError(f"Unknown model kind: {kind}")


def _make_estimator(kind: str, hyperparameters: dict, seed: int):
    if kind == RANDOM_FOREST:
        depth = hyperparameters.get("max_depth")
        return RandomForest(
            trees=int(hyperparameters.get("trees", 100)),
            max_depth=None if depth is None else int(depth),
            min_leaf=int(hyperparameters.get("min_leaf", 1)),
            seed=seed,
        )
    if kind == LOGISTIC_REGRESSION:
        return LogisticRegression(l2=float(hyperparameters.get("l2", 1.0)))
    raise TrainingError(f"Unknown model kind: {kind}")


def _check_classes(y: np.ndarray) -> None:
    if len(np.unique(y)) < 2:
        raise TrainingError("Training needs both positive and negative examples")


def fit_model(X: np.ndarray, y: np.ndarray, kind: str, hyperparameters: dict, seed: int, vocabulary: Vocabulary) -> Model:
    y = np.asarray(y, dtype=np.float64)
    _check_classes(y)
    estimator = _make_estimator(kind, hyperparameters, seed).fit(X, y)
    return Model(
        kind=kind,
        vocabulary=vocabulary,
        hyperparameters=hyperparameters,
        parameters=estimator.parameters(),
        seed=seed,
    )


def training_digest(examples: Sequence[LabeledExample]) -> str:
    digest = hashlib.sha256()
    for example in examples:
        digest.update(example.document.markdown.encode("utf-8"))
        digest.update(example.document.title.encode("utf-8"))
        digest.update(b"\x001" if example.label else b"\x000")
    return digest.hexdigest()


def example_terms(examples: Sequence[LabeledExample], stopwords: FrozenSet[str], with_links: bool = False) -> List[DocumentTerms]:
    return [DocumentTerms(example.document, stopwords, with_links) for example in examples]


def train(
    examples: Sequence[LabeledExample],
    kind: str,
    hyperparameters: dict,
    seed: int,
    stopwords: FrozenSet[str] = frozenset(),
    floor: float = 0.01,
    vocabulary: Optional[Vocabulary] = None,
) -> Model:
    """Fit one model; the threshold stays at 0.5 until `select_threshold` sets it."""
    y = np.array([example.label for example in examples], dtype=np.float64)
    _check_classes(y)
    terms = example_terms(examples, stopwords, with_links=bool(vocabulary and vocabulary.link_terms))
    vocabulary = vocabulary or build_vocabulary(terms, floor)
    model = fit_model(feature_matrix(terms, vocabulary), y, kind, hyperparameters, seed, vocabulary)
    model.training_digest = training_digest(examples)
    return model


def stratified_folds(y: np.ndarray, k: int, seed: int) -> List[np.ndarray]:
    """Fold index arrays; each class is shuffled and dealt round-robin."""
    rng = np.random.default_rng(seed)
    folds: List[List[int]] = [[] for _ in range(k)]
    offset = 0
    for label in (0.0, 1.0):
        members = np.flatnonzero(y == label)
        members = members[rng.permutation(len(members))]
        for position, index in enumerate(members):
            folds[(offset + position) % k].append(int(index))
        offset += len(members)
    return [np.array(sorted(fold), dtype=np.int64) for fold in folds]


def stratified_split(y: np.ndarray, fraction: float, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """(train indices, held-out indices) with `fraction` of each class held out."""
    rng = np.random.default_rng(seed)
    held_out = []
    for label in (0.0, 1.0):
        members = np.flatnonzero(y == label)
        members = members[rng.permutation(len(members))]
        count = int(round(fraction * len(members)))
        if len(members) >= 2:
            count = min(max(count, 1), len(members) - 1)
        else:
            count = 0
        held_out.extend(int(i) for i in members[:count])
    held = np.array(sorted(held_out), dtype=np.int64)
    train_idx = np.setdiff1d(np.arange(len(y)), held)
    return train_idx, held


def cross_validate(
    X: np.ndarray,
    y: np.ndarray,
    kind: str,
    grid: Sequence[dict],
    k: int = 10,
    seed: int = 0,
) -> Tuple[dict, float, List[Tuple[dict, float]]]:
    """Grid search by mean out-of-fold AUC; ties go to the earlier grid point."""
    y = np.asarray(y, dtype=np.float64)
    _check_classes(y)
    if not grid:
        raise TrainingError("Empty hyperparameter grid")
    folds = stratified_folds(y, k, seed)
    results = []
    for params in grid:
        fold_aucs = []
        for test_idx in folds:
            train_idx = np.setdiff1d(np.arange(len(y)), test_idx)
            if len(np.unique(y[test_idx])) < 2 or len(np.unique(y[train_idx])) < 2:
                continue
            estimator = _make_estimator(kind, params, seed).fit(X[train_idx], y[train_idx])
            fold_aucs.append(auc(estimator.predict_proba(X[test_idx]), y[test_idx]))
        if not fold_aucs:
            raise TrainingError(f"No fold of {k} contains both classes; add more labeled examples")
        mean_auc = float(np.mean(fold_aucs))
        logger.info(f"CV {kind} {params}: mean AUC {mean_auc:.4f} over {len(fold_aucs)} folds")
        results.append((params, mean_auc))
    best_params, best_auc = results[0]
    for params, mean_auc in results[1:]:
        if mean_auc > best_auc:
            best_params, best_auc = params, mean_auc
    return best_params, best_auc, results


def score_documents(model: Model, documents: Sequence[PolicyDocument], stopwords: FrozenSet[str] = frozenset()) -> np.ndarray:
    if not documents:
        return np.zeros(0)
    X = np.vstack([featurize(document, model.vocabulary, stopwords) for document in documents])
    return model.score_matrix(X)


def select_threshold(
    model: Model,
    validation: Sequence[LabeledExample],
    min_precision: float = 0.97,
    stopwords: FrozenSet[str] = frozenset(),
) -> float:
    scores = score_documents(model, [example.document for example in validation], stopwords)
    labels = [example.label for example in validation]
    return select_threshold_from_scores(scores, labels, min_precision)


def classify(document: PolicyDocument, model: Model, stopwords: FrozenSet[str] = frozenset()) -> Tuple[float, bool]:
    score = float(score_documents(model, [document], stopwords)[0])
    return score, score >= model.threshold


def evaluate(model: Model, examples: Sequence[LabeledExample], stopwords: FrozenSet[str] = frozenset()) -> dict:
    """Precision, recall and AUC at the model's threshold, plus the ROC curve."""
    scores = score_documents(model, [example.document for example in examples], stopwords)
    labels = [example.label for example in examples]
    precision, recall = precision_recall(scores, labels, model.threshold)
    has_both = 0 < sum(labels) < len(labels)
    return {
        "threshold": model.threshold,
        "examples": len(examples),
        "precision": precision,
        "recall": recall,
        "auc": auc(scores, labels) if has_both else None,
        "roc": roc_points(scores, labels) if has_both else [],
    }


class TrainingReport(BaseModel):
    cv_rows: List[dict]
    evaluation: dict


def train_policy_classifier(
    examples: Sequence[LabeledExample],
    settings,
    seed: int,
    stopwords: FrozenSet[str] = frozenset(),
) -> Tuple[Model, TrainingReport]:
    """Vocabulary, model selection, final fit and threshold for the crawl.

    The vocabulary is built once over every labeled example. Cross
    validation runs on the training split for each configured model kind;
    the kind and grid point with the best mean AUC are refitted on the whole
    training split and thresholded on the held-out split, unless the config
    pins a threshold.
    """
    y = np.array([example.label for example in examples], dtype=np.float64)
    _check_classes(y)
    terms = example_terms(examples, stopwords, settings.include_link_features)
    vocabulary = build_vocabulary(terms, settings.doc_freq_floor, settings.include_link_features)
    X = feature_matrix(terms, vocabulary)
    logger.info(f"Vocabulary: {len(vocabulary.body_terms)} body terms, {len(vocabulary.title_terms)} title terms")
    train_idx, held_idx = stratified_split(y, settings.validation_fraction, seed)

    cv_rows = []
    best = None
    for kind in settings.kinds:
        params, mean_auc, results = cross_validate(
            X[train_idx], y[train_idx], kind, hyperparameter_grid(kind, settings), settings.folds, seed
        )
        cv_rows.extend(
            {"kind": kind, "params": json.dumps(p, sort_keys=True), "mean_auc": a} for p, a in results
        )
        if best is None or mean_auc > best[2]:
            best = (kind, params, mean_auc)
    kind, params, mean_auc = best
    logger.info(f"Selected {kind} {params} with mean AUC {mean_auc:.4f}")

    model = fit_model(X[train_idx], y[train_idx], kind, params, seed, vocabulary)
    model.training_digest = training_digest(examples)
    held_out = [examples[i] for i in held_idx]
    if settings.threshold is not None:
        model.threshold = float(settings.threshold)
        logger.info(f"Using configured threshold {model.threshold}")
    elif held_out and any(example.label for example in held_out):
        model.threshold = select_threshold(model, held_out, settings.min_precision, stopwords)
        logger.info(f"Selected threshold {model.threshold} for precision >= {settings.min_precision}")
    evaluation = evaluate(model, held_out, stopwords) if held_out else {}
    return model, TrainingReport(cv_rows=cv_rows, evaluation=evaluation)


def dump_model(model: Model) -> str:
    return json.dumps(model.model_dump(mode="json"), sort_keys=True, indent=1) + "\n"


def parse_model(text: str) -> Model:
    try:
        return Model.model_validate(json.loads(text))
    except ValueError as e:
        raise TrainingError(f"Unreadable model file: {e}") from e
