"""Relative document frequency series and trend surfacing."""

import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Mapping, Sequence, Set, Tuple, Union

from app.core.analysis.links import link_target_key, outbound_links
from app.core.analysis.placeholders import replace_placeholders
from app.core.analysis.text_metrics import split_sentences
from app.core.classifier.text import ngrams
from app.core.extraction import visible_text
from app.core.models import Interval, PolicyDocument

logger = logging.getLogger(__name__)

_TOKEN = re.compile(r"⟨[A-Z]+⟩|\w+")

NGRAM_KINDS = ("ngram1", "ngram2", "ngram3", "ngram4")
TERM_KINDS = NGRAM_KINDS + ("sentence", "entity", "url")


@dataclass
class TermSeries:
    term: str
    frequencies: Dict[Interval, float] = field(default_factory=dict)

    def values(self) -> List[float]:
        return [self.frequencies[interval] for interval in sorted(self.frequencies)]


Series = Union[TermSeries, Sequence[float]]


def _values(series: Series) -> List[float]:
    return series.values() if isinstance(series, TermSeries) else list(series)


def score_gain(series: Series) -> float:
    """Difference between the highest and lowest frequency."""
    values = _values(series)
    return max(values) - min(values) if values else 0.0


def score_pos_slope2(series: Series) -> float:
    """Largest rise over a window of one or two intervals, 0 when nothing rises."""
    values = _values(series)
    best = 0.0
    for i in range(len(values)):
        for k in (1, 2):
            if i + k < len(values):
                best = max(best, values[i + k] - values[i])
    return best


SCORERS: Dict[str, Callable[[Series], float]] = {"gain": score_gain, "pos_slope2": score_pos_slope2}


def term_series(
    document_terms: Iterable[Tuple[Interval, Iterable[str]]], min_doc_freq: float = 0.0
) -> List[TermSeries]:
    """One series per term over the intervals that have documents.

    A term is kept when its frequency reaches `min_doc_freq` in at least one
    interval. Intervals without documents are absent from every series.
    """
    totals: Counter = Counter()
    counts: Dict[str, Counter] = {}
    for interval, terms in document_terms:
        totals[interval] += 1
        for term in set(terms):
            counts.setdefault(term, Counter())[interval] += 1
    intervals = sorted(totals)
    result = []
    for term in sorted(counts):
        frequencies = {interval: counts[term][interval] / totals[interval] for interval in intervals}
        if max(frequencies.values()) >= min_doc_freq - 1e-12:
            result.append(TermSeries(term=term, frequencies=frequencies))
    return result


def trend_tokens(text: str) -> List[str]:
    return [token if token.startswith("⟨") else token.lower() for token in _TOKEN.findall(text)]


def extract_terms(markdown: str, kinds: Sequence[str] = TERM_KINDS) -> Dict[str, Set[str]]:
    """Terms of each kind in one document, after placeholder normalization."""
    text = visible_text(markdown)
    normalized = replace_placeholders(text)
    terms: Dict[str, Set[str]] = {}
    tokens = trend_tokens(normalized.text)
    for kind in kinds:
        if kind.startswith("ngram"):
            terms[kind] = set(ngrams(tokens, int(kind[len("ngram"):])))
        elif kind == "sentence":
            terms[kind] = {" ".join(trend_tokens(sentence)) for sentence in split_sentences(normalized.text)}
        elif kind == "entity":
            terms[kind] = {" ".join(entity.split()) for entity in normalized.entities}
        elif kind == "url":
            hrefs = [link.href for link in outbound_links(markdown)] + normalized.urls
            terms[kind] = {link_target_key(href if "://" in href else f"http://{href}") for href in hrefs}
        else:
            raise ValueError(f"Unknown term kind: {kind}")
    return terms


def rank_terms(
    series: Sequence[TermSeries], scorer: Callable[[Series], float], top_k: int
) -> List[Tuple[str, float]]:
    scored = [(s.term, scorer(s)) for s in series]
    scored.sort(key=lambda row: (-row[1], row[0]))
    return scored[:top_k]


def surface_trends(
    documents: Sequence[PolicyDocument],
    kinds: Sequence[str] = TERM_KINDS,
    scorers: Mapping[str, Callable[[Series], float]] = SCORERS,
    top_k: int = 20,
    min_doc_freq: float = 0.0,
) -> Dict[Tuple[str, str], List[Tuple[str, float]]]:
    """Top terms for every (term kind, scorer) pair."""
    per_document = [(document.interval, extract_terms(document.markdown, kinds)) for document in documents]
    rankings = {}
    for kind in kinds:
        series = term_series(((interval, terms[kind]) for interval, terms in per_document), min_doc_freq)
        logger.info(f"Scoring {len(series)} {kind} terms")
        for name, scorer in scorers.items():
            rankings[(kind, name)] = rank_terms(series, scorer, top_k)
    return rankings
