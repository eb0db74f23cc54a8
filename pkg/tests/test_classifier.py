import numpy as np
import pytest

from app.core.classifier.features import DocumentTerms, Vocabulary, build_vocabulary, feature_matrix, featurize
from app.core.classifier.forest import RandomForest
from app.core.classifier.logistic import LogisticRegression
from app.core.classifier.metrics import precision_recall, roc_points, select_threshold_from_scores
from app.core.classifier.text import ngrams, preprocess, url_tokens
from app.core.classifier.training import (
    LOGISTIC_REGRESSION,
    RANDOM_FOREST,
    classify,
    cross_validate,
    dump_model,
    evaluate,
    parse_model,
    stratified_folds,
    stratified_split,
    train,
    train_policy_classifier,
)
from app.core.config import ClassifierSettings
from app.core.errors import TrainingError
from app.core.models import LabeledExample, PolicyDocument

FILLER = (
    "river stone window garden market summer yellow engine travel recipe kitchen museum guitar "
    "planet forest winter coffee camera bridge island letter silver orange puzzle rocket"
).split()
PLANTED = ["privacy policy", "personal information", "third parties", "opt out"]


def synthetic_corpus(count: int, seed: int):
    rng = np.random.default_rng(seed)
    examples = []
    for i in range(count):
        label = i % 2 == 0
        words = [FILLER[j] for j in rng.integers(0, len(FILLER), size=30)]
        if label:
            extra = PLANTED[1 + int(rng.integers(0, len(PLANTED) - 1))]
            for phrase in ("privacy policy", extra):
                words.insert(int(rng.integers(0, len(words))), phrase)
        title = "Privacy Policy" if label and rng.random() < 0.5 else "Welcome"
        document = PolicyDocument(site=f"site{i}.example", markdown=" ".join(words) + ".", title=title)
        examples.append(LabeledExample(document=document, label=label))
    return examples


def small_settings(**overrides):
    values = dict(
        folds=10,
        kinds=[RANDOM_FOREST],
        grid_trees=[15],
        grid_max_depth=[None],
        grid_min_leaf=[1],
        doc_freq_floor=0.1,
        min_precision=0.97,
    )
    values.update(overrides)
    return ClassifierSettings(**values)


def test_preprocess_strips_markup_and_stopwords():
    tokens = preprocess("## Privacy Policy\n\nWe use **cookies**, see [this](http://x.example/)!", frozenset({"we", "see"}))
    assert tokens == ["privacy", "policy", "use", "cookies", "this"]


def test_ngrams_and_url_tokens():
    assert ngrams(["a", "b", "c"], 2) == ["a b", "b c"]
    assert ngrams(["a"], 2) == []
    assert url_tokens("https://www.Example.com/legal/privacy-policy.html") == ["example", "com", "legal", "privacy", "policy", "html"]


def test_featurize_counts_ngrams():
    vocabulary = Vocabulary(body_terms=["cookie", "policy", "cookie policy"], title_terms=[])
    vector = featurize(PolicyDocument(site="x", markdown="cookie cookie policy"), vocabulary)
    assert vector.tolist() == [2.0, 1.0, 1.0]


def test_vocabulary_floor_is_inclusive():
    documents = [PolicyDocument(site=str(i), markdown=text) for i, text in enumerate(["alpha beta", "alpha", "gamma", "delta"])]
    terms = [DocumentTerms(document, frozenset()) for document in documents]
    vocabulary = build_vocabulary(terms, floor=0.5)
    assert vocabulary.body_terms == ["alpha"]
    assert feature_matrix(terms, vocabulary)[:, 0].tolist() == [1.0, 1.0, 0.0, 0.0]


def test_select_threshold_smallest_reaching_precision():
    scores = [0.95, 0.9, 0.8, 0.7, 0.6, 0.3]
    labels = [1, 1, 1, 0, 1, 0]
    assert select_threshold_from_scores(scores, labels, 0.97) == 0.8
    assert select_threshold_from_scores(scores, labels, 0.5) == 0.3


def test_select_threshold_unattainable_falls_back_to_best():
    assert select_threshold_from_scores([0.9, 0.8], [0, 1], 0.97) == 0.8
    with pytest.raises(ValueError):
        select_threshold_from_scores([0.9, 0.8], [0, 0])


def test_precision_recall_and_roc():
    precision, recall = precision_recall([0.9, 0.4, 0.7], [1, 1, 0], 0.95)
    assert precision is None and recall == 0.0
    points = roc_points([0.9, 0.4, 0.7], [1, 1, 0])
    assert points[0] == (float("inf"), 0.0, 0.0)
    assert points[-1] == (0.4, 1.0, 1.0)


def test_xor_separates_forest_from_logistic():
    points = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=np.float64)
    labels = np.array([0, 1, 1, 0], dtype=np.float64)
    X, y = np.tile(points, (10, 1)), np.tile(labels, 10)
    forest = RandomForest(trees=101, max_depth=None, min_leaf=1, seed=0).fit(X, y)
    logistic = LogisticRegression(l2=0.1).fit(X, y)
    forest_accuracy = np.mean((forest.predict_proba(points) >= 0.5) == labels.astype(bool))
    logistic_accuracy = np.mean((logistic.predict_proba(points) >= 0.5) == labels.astype(bool))
    assert forest_accuracy == 1.0
    assert logistic_accuracy <= 0.75


def test_logistic_fits_separable_data():
    X = np.array([[0, 0], [0, 1], [1, 0], [1, 1], [4, 4], [4, 5], [5, 4], [5, 5]], dtype=np.float64)
    y = np.array([0, 0, 0, 0, 1, 1, 1, 1], dtype=np.float64)
    model = LogisticRegression(l2=0.1).fit(X, y)
    assert np.array_equal(model.predict_proba(X) >= 0.5, y.astype(bool))
    restored = LogisticRegression.from_parameters(model.parameters())
    assert np.allclose(restored.predict_proba(X), model.predict_proba(X))


def test_forest_is_deterministic_per_seed():
    rng = np.random.default_rng(3)
    X = rng.integers(0, 3, size=(60, 6)).astype(np.float64)
    y = (X[:, 0] + X[:, 1] > 2).astype(np.float64)
    first = RandomForest(trees=10, seed=42).fit(X, y)
    second = RandomForest(trees=10, seed=42).fit(X, y)
    assert first.parameters() == second.parameters()
    assert np.array_equal(first.predict_proba(X), RandomForest.from_parameters(first.parameters()).predict_proba(X))


def test_stratified_folds_partition_indices():
    y = np.array([1.0] * 13 + [0.0] * 27)
    folds = stratified_folds(y, 10, seed=1)
    assert sorted(np.concatenate(folds).tolist()) == list(range(40))
    assert all(y[fold].sum() >= 1 and (1 - y[fold]).sum() >= 2 for fold in folds)
    train_idx, held = stratified_split(y, 0.25, seed=1)
    assert len(np.intersect1d(train_idx, held)) == 0
    assert y[held].sum() == 3


def test_cross_validation_on_planted_corpus():
    examples = synthetic_corpus(400, seed=11)
    terms = [DocumentTerms(example.document, frozenset()) for example in examples]
    vocabulary = build_vocabulary(terms, floor=0.1)
    X = feature_matrix(terms, vocabulary)
    y = np.array([example.label for example in examples], dtype=np.float64)
    grid = [{"trees": 15, "max_depth": None, "min_leaf": 1}, {"trees": 15, "max_depth": 4, "min_leaf": 5}]
    params, mean_auc, results = cross_validate(X, y, RANDOM_FOREST, grid, k=10, seed=0)
    assert mean_auc >= 0.98
    assert params in grid
    assert len(results) == 2
    _, logistic_auc, _ = cross_validate(X, y, LOGISTIC_REGRESSION, [{"l2": 1.0}], k=10, seed=0)
    assert logistic_auc >= 0.98


def test_trained_classifier_meets_precision_on_fresh_data():
    model, report = train_policy_classifier(synthetic_corpus(400, seed=5), small_settings(), seed=7)
    assert report.cv_rows and report.cv_rows[0]["mean_auc"] >= 0.98
    assert report.evaluation["precision"] >= 0.97
    fresh = synthetic_corpus(200, seed=99)
    result = evaluate(model, fresh)
    assert result["precision"] >= 0.97
    assert result["auc"] >= 0.98


def test_same_seed_gives_identical_model_file():
    examples = synthetic_corpus(120, seed=2)
    first, _ = train_policy_classifier(examples, small_settings(folds=3), seed=4)
    second, _ = train_policy_classifier(examples, small_settings(folds=3), seed=4)
    assert dump_model(first) == dump_model(second)


def test_model_round_trip_and_classify():
    examples = synthetic_corpus(80, seed=8)
    model = train(examples, LOGISTIC_REGRESSION, {"l2": 1.0}, seed=0, floor=0.05)
    restored = parse_model(dump_model(model))
    positive = PolicyDocument(site="p", markdown="Read our privacy policy about personal information and third parties.")
    negative = PolicyDocument(site="n", markdown="river stone window garden market summer yellow engine.")
    assert classify(positive, restored) == classify(positive, model)
    assert classify(positive, model)[1] is True
    assert classify(negative, model)[1] is False


def test_configured_threshold_is_kept():
    model, _ = train_policy_classifier(synthetic_corpus(80, seed=1), small_settings(folds=3, threshold=0.3), seed=0)
    assert model.threshold == 0.3


def test_training_needs_both_classes():
    examples = [example for example in synthetic_corpus(40, seed=0) if example.label]
    with pytest.raises(TrainingError):
        train(examples, RANDOM_FOREST, {"trees": 5}, seed=0)
    with pytest.raises(TrainingError):
        parse_model("{not json")


def random_scores(seed: int):
    rng = np.random.default_rng(seed)
    size = int(rng.integers(2, 60))
    scores = np.round(rng.random(size), 2).tolist()
    labels = rng.integers(0, 2, size=size).tolist()
    labels[int(rng.integers(0, size))] = 1
    return scores, labels


@pytest.mark.parametrize("seed", range(100))
def test_select_threshold_monotone_in_precision(seed):
    scores, labels = random_scores(seed)
    levels = sorted(np.random.default_rng(seed + 1000).random(5).tolist()) + [1.0]
    thresholds = [select_threshold_from_scores(scores, labels, level) for level in levels]
    assert thresholds == sorted(thresholds)


@pytest.fixture(scope="module")
def logistic_model():
    return train(synthetic_corpus(80, seed=8), LOGISTIC_REGRESSION, {"l2": 1.0}, seed=0, floor=0.05)


@pytest.mark.parametrize("seed", range(100))
def test_score_equal_to_threshold_is_positive(seed, logistic_model):
    rng = np.random.default_rng(seed)
    vocabulary = FILLER + PLANTED
    words = [vocabulary[j] for j in rng.integers(0, len(vocabulary), size=int(rng.integers(5, 40)))]
    document = PolicyDocument(site=f"doc{seed}.example", markdown=" ".join(words) + ".")
    score, _ = classify(document, logistic_model)
    at_score = logistic_model.model_copy(update={"threshold": score})
    above_score = logistic_model.model_copy(update={"threshold": float(np.nextafter(score, 2.0))})
    assert classify(document, at_score) == (score, True)
    assert classify(document, above_score) == (score, False)
