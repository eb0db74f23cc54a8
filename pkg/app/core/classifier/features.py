from collections import Counter
from typing import Dict, FrozenSet, List, Sequence

import numpy as np
from pydantic import BaseModel, PrivateAttr

from app.core.classifier.text import ngrams, preprocess, tokenize, url_tokens
from app.core.models import PolicyDocument

BODY_NGRAM_SIZES = (1, 2, 3, 4)


class Vocabulary(BaseModel):
    body_terms: List[str]
    title_terms: List[str]
    link_terms: List[str] = []
    doc_freq_floor: float = 0.01

    _index: Dict[str, Dict[str, int]] = PrivateAttr(default=None)

    @property
    def dimension(self) -> int:
        return len(self.body_terms) + len(self.title_terms) + len(self.link_terms)

    def index(self) -> Dict[str, Dict[str, int]]:
        if self._index is None:
            self._index = {
                "body": {term: i for i, term in enumerate(self.body_terms)},
                "title": {term: i for i, term in enumerate(self.title_terms)},
                "link": {term: i for i, term in enumerate(self.link_terms)},
            }
        return self._index


def body_counts(tokens: List[str]) -> Counter:
    counts = Counter()
    for n in BODY_NGRAM_SIZES:
        counts.update(ngrams(tokens, n))
    return counts


def link_counts(document: PolicyDocument) -> Counter:
    counts = Counter(f"link:{token}" for token in tokenize(document.link_text))
    counts.update(f"url:{token}" for token in url_tokens(document.policy_url))
    return counts


class DocumentTerms:
    """Term counts of one document, computed once and reused for every model fit."""

    def __init__(self, document: PolicyDocument, stopwords: FrozenSet[str], with_links: bool = False):
        self.body = body_counts(preprocess(document.markdown, stopwords))
        self.title = Counter(preprocess(document.title, stopwords))
        self.link = link_counts(document) if with_links else Counter()


def _frequent(counters: Sequence[Counter], floor: float) -> List[str]:
    if not counters:
        return []
    df = Counter()
    for counts in counters:
        df.update(counts.keys())
    minimum = floor * len(counters)
    return sorted(term for term, count in df.items() if count >= minimum - 1e-9)


def build_vocabulary(terms: Sequence[DocumentTerms], floor: float = 0.01, with_links: bool = False) -> Vocabulary:
    """Body n-grams and title unigrams whose document frequency reaches `floor` (inclusive)."""
    return Vocabulary(
        body_terms=_frequent([t.body for t in terms], floor),
        title_terms=_frequent([t.title for t in terms], floor),
        link_terms=_frequent([t.link for t in terms], floor) if with_links else [],
        doc_freq_floor=floor,
    )


def featurize_terms(terms: DocumentTerms, vocabulary: Vocabulary) -> np.ndarray:
    index = vocabulary.index()
    vector = np.zeros(vocabulary.dimension, dtype=np.float64)
    offsets = {"body": 0, "title": len(vocabulary.body_terms), "link": len(vocabulary.body_terms) + len(vocabulary.title_terms)}
    for part, counts in (("body", terms.body), ("title", terms.title), ("link", terms.link)):
        lookup = index[part]
        for term, count in counts.items():
            position = lookup.get(term)
            if position is not None:
                vector[offsets[part] + position] = count
    return vector


def featurize(document: PolicyDocument, vocabulary: Vocabulary, stopwords: FrozenSet[str] = frozenset()) -> np.ndarray:
    terms = DocumentTerms(document, stopwords, with_links=bool(vocabulary.link_terms))
    return featurize_terms(terms, vocabulary)


def feature_matrix(terms: Sequence[DocumentTerms], vocabulary: Vocabulary) -> np.ndarray:
    if not terms:
        return np.zeros((0, vocabulary.dimension))
    return np.vstack([featurize_terms(t, vocabulary) for t in terms])
