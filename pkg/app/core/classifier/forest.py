"""Bagged CART trees with Gini splits, built on numpy."""

import logging
import math
from typing import List, Optional

import numpy as np

logger = logging.getLogger(__name__)

LEAF = -1


class DecisionTree:
    """Binary tree stored as parallel arrays; node 0 is the root.

    A sample goes left when x[feature] <= threshold. Leaves hold the
    positive-class fraction of the training samples that reached them.
    """

    def __init__(self, feature=None, threshold=None, left=None, right=None, value=None):
        self.feature: List[int] = feature or []
        self.threshold: List[float] = threshold or []
        self.left: List[int] = left or []
        self.right: List[int] = right or []
        self.value: List[float] = value or []

    def _add_node(self) -> int:
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(0.0)
        return len(self.feature) - 1

    def fit(
        self,
        X: np.ndarray,
        y: np.ndarray,
        rng: np.random.Generator,
        max_depth: Optional[int] = None,
        min_leaf: int = 1,
        max_features: Optional[int] = None,
    ) -> "DecisionTree":
        d = X.shape[1]
        max_features = max_features or max(1, math.ceil(math.sqrt(d)))
        stack = [(self._add_node(), np.arange(len(y)), 0)]
        while stack:
            node, idx, depth = stack.pop()
            labels = y[idx]
            positive = float(labels.mean()) if len(labels) else 0.0
            self.value[node] = positive
            if positive in (0.0, 1.0) or (max_depth is not None and depth >= max_depth) or len(idx) < 2 * min_leaf:
                continue
            split = self._best_split(X, labels, idx, rng.permutation(d), max_features, min_leaf)
            if split is None:
                continue
            feature, threshold = split
            goes_left = X[idx, feature] <= threshold
            left, right = self._add_node(), self._add_node()
            self.feature[node], self.threshold[node] = int(feature), float(threshold)
            self.left[node], self.right[node] = left, right
            stack.append((right, idx[~goes_left], depth + 1))
            stack.append((left, idx[goes_left], depth + 1))
        return self

    @staticmethod
    def _best_split(X, labels, idx, features, max_features, min_leaf):
        """Lowest weighted Gini among the first `max_features` shuffled features.

        Splits that do not lower impurity are still accepted; when none of
        the sampled features can split the node the search moves on to the
        remaining ones, as in the usual CART implementations.
        """
        n = len(idx)
        for start in range(0, len(features), max_features):
            chosen = features[start:start + max_features]
            values = X[np.ix_(idx, chosen)]
            order = np.argsort(values, axis=0, kind="stable")
            sorted_values = np.take_along_axis(values, order, axis=0)
            sorted_labels = labels[order]
            pos_left = np.cumsum(sorted_labels, axis=0)[:-1]
            n_left = np.arange(1, n)[:, None].astype(np.float64)
            n_right = n - n_left
            pos_right = labels.sum() - pos_left
            gini_left = 1.0 - (pos_left / n_left) ** 2 - ((n_left - pos_left) / n_left) ** 2
            gini_right = 1.0 - (pos_right / n_right) ** 2 - ((n_right - pos_right) / n_right) ** 2
            weighted = (n_left * gini_left + n_right * gini_right) / n
            valid = (sorted_values[1:] != sorted_values[:-1]) & (n_left >= min_leaf) & (n_right >= min_leaf)
            if not valid.any():
                continue
            weighted = np.where(valid, weighted, np.inf)
            row, col = np.unravel_index(int(np.argmin(weighted)), weighted.shape)
            threshold = (sorted_values[row, col] + sorted_values[row + 1, col]) / 2.0
            return chosen[col], threshold
        return None

    def predict(self, X: np.ndarray) -> np.ndarray:
        feature = np.asarray(self.feature)
        threshold = np.asarray(self.threshold)
        left = np.asarray(self.left)
        right = np.asarray(self.right)
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            active = feature[node] != LEAF
            if not active.any():
                break
            current = node[active]
            goes_left = X[rows[active], feature[current]] <= threshold[current]
            node[active] = np.where(goes_left, left[current], right[current])
        return np.asarray(self.value)[node]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left,
            "right": self.right,
            "value": self.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DecisionTree":
        return cls(**{key: list(data[key]) for key in ("feature", "threshold", "left", "right", "value")})


class RandomForest:
    def __init__(self, trees: int = 100, max_depth: Optional[int] = None, min_leaf: int = 1, seed: int = 0):
        self.n_trees = trees
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.seed = seed
        self.trees: List[DecisionTree] = []

    def fit(self, X: np.ndarray, y: np.ndarray) -> "RandomForest":
        y = np.asarray(y, dtype=np.float64)
        n = len(y)
        max_features = max(1, math.ceil(math.sqrt(X.shape[1])))
        self.trees = []
        for child in np.random.SeedSequence(self.seed).spawn(self.n_trees):
            rng = np.random.default_rng(child)
            sample = rng.integers(0, n, size=n)
            tree = DecisionTree().fit(X[sample], y[sample], rng, self.max_depth, self.min_leaf, max_features)
            self.trees.append(tree)
        logger.debug(f"Fitted {self.n_trees} trees on {n} samples x {X.shape[1]} features")
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if not self.trees:
            raise ValueError("Forest has not been fitted")
        return np.mean([tree.predict(X) for tree in self.trees], axis=0)

    def parameters(self) -> dict:
        return {"trees": [tree.to_dict() for tree in self.trees]}

    @classmethod
    def from_parameters(cls, parameters: dict) -> "RandomForest":
        forest = cls(trees=len(parameters["trees"]))
        forest.trees = [DecisionTree.from_dict(tree) for tree in parameters["trees"]]
        return forest
