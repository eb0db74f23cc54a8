"""Rule-based English lemmatizer for n-gram change-point analysis."""

from pathlib import Path
from typing import Dict, Mapping, Optional

VOWELS = frozenset("aeiouy")
MIN_STEM = 3
_UNDOUBLED = frozenset("lsz")


def load_exceptions(path: Path) -> Dict[str, str]:
    exceptions = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        parts = line.split("#", 1)[0].split()
        if len(parts) == 2:
            exceptions[parts[0].lower()] = parts[1].lower()
    return exceptions


def _has_vowel(stem: str) -> bool:
    return any(ch in VOWELS for ch in stem)


def _strip_verb_suffix(word: str, suffix: str) -> Optional[str]:
    stem = word[: -len(suffix)]
    if suffix == "ed" and stem.endswith("e"):
        return None
    if len(stem) >= 2 and stem[-1] == stem[-2] and stem[-1] not in VOWELS and stem[-1] not in _UNDOUBLED:
        if len(stem) - 1 >= MIN_STEM:
            stem = stem[:-1]
    if len(stem) >= MIN_STEM and _has_vowel(stem):
        return stem
    return None


def _apply_rules(word: str) -> str:
    if word.endswith("ies") and len(word) - 2 >= MIN_STEM:
        return word[:-3] + "y"
    if word.endswith("sses"):
        return word[:-2]
    if word.endswith("s") and not word.endswith(("ss", "us", "is")) and len(word) - 1 >= MIN_STEM:
        return word[:-1]
    for suffix in ("ing", "ed"):
        if word.endswith(suffix):
            stem = _strip_verb_suffix(word, suffix)
            if stem is not None:
                return stem
    return word


class Lemmatizer:
    """Exception table first, then ordered suffix rules."""

    def __init__(self, exceptions: Optional[Mapping[str, str]] = None):
        self.exceptions = dict(exceptions or {})
        self._cache: Dict[str, str] = {}

    @classmethod
    def from_file(cls, path: Path) -> "Lemmatizer":
        return cls(load_exceptions(path))

    def __call__(self, token: str) -> str:
        cached = self._cache.get(token)
        if cached is not None:
            return cached
        word = token.lower()
        if word in self.exceptions:
            lemma = self.exceptions[word]
        elif word.isalpha():
            lemma = _apply_rules(word)
        else:
            lemma = word
        self._cache[token] = lemma
        return lemma


def lemmatize(token: str, exceptions: Optional[Mapping[str, str]] = None) -> str:
    return Lemmatizer(exceptions)(token)
