from app.core.classifier.features import Vocabulary, build_vocabulary, featurize
from app.core.classifier.metrics import auc, select_threshold_from_scores
from app.core.classifier.text import load_stopwords, preprocess
from app.core.classifier.training import (
    Model,
    classify,
    cross_validate,
    evaluate,
    select_threshold,
    train,
    train_policy_classifier,
)

__all__ = [
    "Model",
    "Vocabulary",
    "auc",
    "build_vocabulary",
    "classify",
    "cross_validate",
    "evaluate",
    "featurize",
    "load_stopwords",
    "preprocess",
    "select_threshold",
    "select_threshold_from_scores",
    "train",
    "train_policy_classifier",
]
