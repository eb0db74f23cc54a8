"""Character-trigram language identification."""

import logging
import math
import re
from collections import Counter
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np

from app.core.interfaces import ILanguageDetector

logger = logging.getLogger(__name__)

UNDETERMINED = "und"
MIN_TEXT_LENGTH = 40

_NON_LETTERS = re.compile(r"[^\w]+|[\d_]+", re.UNICODE)


def _normalize(text: str) -> str:
    return " ".join(_NON_LETTERS.sub(" ", text.lower()).split())


def trigrams(text: str) -> Counter:
    normalized = f" {_normalize(text)} "
    return Counter(normalized[i:i + 3] for i in range(len(normalized) - 2))


class TrigramLanguageDetector(ILanguageDetector):
    """Naive-Bayes over character trigrams with add-one smoothing.

    Profiles are trigram counts of reference samples, one per language.
    The confidence is the posterior of the winning language under a
    uniform prior, so it is close to 1 for any reasonably long text.
    """

    def __init__(self, profiles: Dict[str, Counter]):
        if not profiles:
            raise ValueError("At least one language profile is required")
        self.languages = sorted(profiles)
        vocabulary = set()
        for counts in profiles.values():
            vocabulary.update(counts)
        self._vocab_size = len(vocabulary) + 1
        self._totals = {lang: sum(profiles[lang].values()) for lang in self.languages}
        self._profiles = profiles

    @classmethod
    def from_directory(cls, directory: Path) -> "TrigramLanguageDetector":
        profiles = {}
        for path in sorted(Path(directory).glob("*.txt")):
            profiles[path.stem] = trigrams(path.read_text(encoding="utf-8"))
        logger.info(f"Loaded {len(profiles)} language profiles from {directory}")
        return cls(profiles)

    def _log_likelihood(self, lang: str, grams: Counter) -> float:
        counts = self._profiles[lang]
        denominator = self._totals[lang] + self._vocab_size
        return sum(n * math.log((counts.get(g, 0) + 1) / denominator) for g, n in grams.items())

    def scores(self, text: str) -> Optional[Dict[str, float]]:
        if len(_normalize(text)) < MIN_TEXT_LENGTH:
            return None
        grams = trigrams(text)
        loglik = np.array([self._log_likelihood(lang, grams) for lang in self.languages])
        posterior = np.exp(loglik - loglik.max())
        posterior /= posterior.sum()
        return {lang: float(p) for lang, p in zip(self.languages, posterior)}

    def detect(self, text: str) -> Tuple[str, float]:
        scores = self.scores(text)
        if scores is None:
            return UNDETERMINED, 0.0
        best = max(self.languages, key=lambda lang: (scores[lang], lang == "en"))
        return best, scores[best]


def detect_language(text: str, detector: ILanguageDetector) -> Tuple[str, float]:
    return detector.detect(text)


def is_english(language: str, confidence: float, min_confidence: float, allow_undetermined: bool = True) -> bool:
    """English, or not confidently anything else."""
    if language == "en":
        return True
    if language == UNDETERMINED:
        return allow_undetermined
    return confidence < min_confidence
