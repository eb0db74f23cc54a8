"""Corpus-level tables: rank buckets, lengths, readability, updates and coverage."""

import logging
import re
from collections import Counter, defaultdict
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from app.core.analysis.text_metrics import fkgl, word_count
from app.core.analysis.updates import SIMILARITY_THRESHOLD, UpdateStatus, detect_updates, update_length
from app.core.errors import UndefinedReadabilityError
from app.core.extraction import strip_to_sentences, visible_text
from app.core.intervals import parse_interval, previous_interval
from app.core.models import AttemptRecord, Interval, PolicyDocument, SiteRecord

logger = logging.getLogger(__name__)

RANK_BUCKETS: Tuple[Tuple[str, int], ...] = (
    ("(1,1K]", 1_000),
    ("(1K,10K]", 10_000),
    ("(10K,100K]", 100_000),
    ("(100K,1M]", 1_000_000),
)
UNRANKED_BUCKET = ">1M"
BUCKET_ORDER = tuple(name for name, _ in RANK_BUCKETS) + (UNRANKED_BUCKET,)
UNCATEGORIZED = "uncategorized"


def rank_bucket(rank: Optional[int]) -> str:
    if rank is None:
        return UNRANKED_BUCKET
    for name, upper in RANK_BUCKETS:
        if rank <= upper:
            return name
    return UNRANKED_BUCKET


def site_bucket(sites: Mapping[str, SiteRecord], site: str, interval: Interval) -> str:
    record = sites.get(site)
    return rank_bucket(record.rank_at(interval) if record else None)


def _percent(part: int, whole: int) -> float:
    return round(100.0 * part / whole, 2) if whole else 0.0


def rank_bucket_stats(
    records: Sequence[AttemptRecord], policies: Sequence[AttemptRecord], sites: Mapping[str, SiteRecord]
) -> pd.DataFrame:
    """Homepage snapshots and curated policies per popularity bucket at the snapshot's interval."""
    attempts: Counter = Counter()
    found: Counter = Counter()
    for record in records:
        attempts[site_bucket(sites, record.site, parse_interval(record.interval))] += 1
    for record in policies:
        found[site_bucket(sites, record.site, parse_interval(record.interval))] += 1
    rows = [
        {"bucket": b, "homepage_snapshots": attempts[b], "policies": found[b], "percent": _percent(found[b], attempts[b])}
        for b in BUCKET_ORDER
    ]
    return pd.DataFrame(rows, columns=["bucket", "homepage_snapshots", "policies", "percent"])


def interval_counts(records: Sequence[AttemptRecord], policies: Sequence[AttemptRecord]) -> pd.DataFrame:
    attempts = Counter(parse_interval(r.interval) for r in records)
    found = Counter(parse_interval(r.interval) for r in policies)
    rows = [
        {"interval": str(i), "homepage_snapshots": attempts[i], "policies": found[i]}
        for i in sorted(set(attempts) | set(found))
    ]
    return pd.DataFrame(rows, columns=["interval", "homepage_snapshots", "policies"])


def snapshots_per_site(policies: Sequence[AttemptRecord]) -> pd.DataFrame:
    per_site = Counter(r.site for r in policies)
    counts = np.array(list(per_site.values()), dtype=float)
    row = {
        "sites": len(per_site),
        "mean_snapshots": round(float(counts.mean()), 4) if len(counts) else 0.0,
        "median_snapshots": float(np.median(counts)) if len(counts) else 0.0,
    }
    return pd.DataFrame([row], columns=["sites", "mean_snapshots", "median_snapshots"])


def category_distribution(
    site_domains: Iterable[str], policies: Sequence[AttemptRecord], categories: Mapping[str, Sequence[str]]
) -> pd.DataFrame:
    """Sites with and without a curated policy, per category."""
    with_policy = {r.site for r in policies}
    present: Counter = Counter()
    absent: Counter = Counter()
    for site in site_domains:
        for category in categories.get(site) or (UNCATEGORIZED,):
            (present if site in with_policy else absent)[category] += 1
    rows = [
        {"category": c, "present": present[c], "absent": absent[c]} for c in sorted(set(present) | set(absent))
    ]
    return pd.DataFrame(rows, columns=["category", "present", "absent"])


def _metric_frame(
    documents: Sequence[PolicyDocument],
    metric: Callable[[PolicyDocument], float],
    sites: Optional[Mapping[str, SiteRecord]] = None,
) -> pd.DataFrame:
    rows = []
    for document in documents:
        try:
            value = metric(document)
        except UndefinedReadabilityError:
            continue
        bucket = site_bucket(sites or {}, document.site, document.interval)
        rows.append({"interval": str(document.interval), "bucket": bucket, "value": value})
    return pd.DataFrame(rows, columns=["interval", "bucket", "value"])


def _by_bucket(frame: pd.DataFrame, column: str) -> pd.DataFrame:
    if frame.empty:
        return pd.DataFrame(columns=["interval", "bucket", column])
    grouped = frame.groupby(["interval", "bucket"], sort=True)["value"].median().reset_index()
    return grouped.rename(columns={"value": column})


def _document_words(document: PolicyDocument) -> float:
    return word_count(document.markdown)


def _document_fkgl(document: PolicyDocument) -> float:
    return fkgl(strip_to_sentences(document.markdown))


def length_report(documents: Sequence[PolicyDocument]) -> pd.DataFrame:
    """Median, 5th and 95th percentile word count per interval."""
    frame = _metric_frame(documents, _document_words)
    if frame.empty:
        return pd.DataFrame(columns=["interval", "median_word_count", "p5", "p95"])
    grouped = frame.groupby("interval", sort=True)["value"]
    return pd.DataFrame(
        {
            "median_word_count": grouped.median(),
            "p5": grouped.quantile(0.05),
            "p95": grouped.quantile(0.95),
        }
    ).reset_index()


def length_by_bucket(documents: Sequence[PolicyDocument], sites: Mapping[str, SiteRecord]) -> pd.DataFrame:
    return _by_bucket(_metric_frame(documents, _document_words, sites), "median_word_count")


def readability_report(documents: Sequence[PolicyDocument]) -> pd.DataFrame:
    """Median grade level per interval; documents without sentences are skipped."""
    frame = _metric_frame(documents, _document_fkgl)
    if frame.empty:
        return pd.DataFrame(columns=["interval", "median_fkgl"])
    return frame.groupby("interval", sort=True)["value"].median().reset_index().rename(columns={"value": "median_fkgl"})


def readability_by_bucket(documents: Sequence[PolicyDocument], sites: Mapping[str, SiteRecord]) -> pd.DataFrame:
    return _by_bucket(_metric_frame(documents, _document_fkgl, sites), "median_fkgl")


def by_site(documents: Sequence[PolicyDocument]) -> Dict[str, Dict[Interval, PolicyDocument]]:
    grouped: Dict[str, Dict[Interval, PolicyDocument]] = defaultdict(dict)
    for document in documents:
        grouped[document.site][document.interval] = document
    return dict(grouped)


def update_statuses(
    documents: Sequence[PolicyDocument], threshold: int = SIMILARITY_THRESHOLD
) -> List[Tuple[PolicyDocument, UpdateStatus]]:
    result = []
    for site, timeline in sorted(by_site(documents).items()):
        statuses = detect_updates({i: d.markdown for i, d in timeline.items()}, threshold)
        result.extend((timeline[interval], status) for interval, status in sorted(statuses.items()))
    return result


def _pct_updated(statuses: Iterable[UpdateStatus]) -> Optional[float]:
    counted = [s for s in statuses if s != UpdateStatus.SKIPPED]
    if not counted:
        return None
    return _percent(sum(1 for s in counted if s == UpdateStatus.UPDATED), len(counted))


def update_report(documents: Sequence[PolicyDocument], threshold: int = SIMILARITY_THRESHOLD) -> pd.DataFrame:
    """Percent of significant updates per interval among documents with a predecessor."""
    grouped: Dict[Interval, List[UpdateStatus]] = defaultdict(list)
    for document, status in update_statuses(documents, threshold):
        grouped[document.interval].append(status)
    rows = []
    for interval in sorted(grouped):
        pct = _pct_updated(grouped[interval])
        if pct is not None:
            rows.append({"interval": str(interval), "pct_updated": pct})
    return pd.DataFrame(rows, columns=["interval", "pct_updated"])


def update_by_bucket(
    documents: Sequence[PolicyDocument], sites: Mapping[str, SiteRecord], threshold: int = SIMILARITY_THRESHOLD
) -> pd.DataFrame:
    grouped: Dict[Tuple[Interval, str], List[UpdateStatus]] = defaultdict(list)
    for document, status in update_statuses(documents, threshold):
        grouped[(document.interval, site_bucket(sites, document.site, document.interval))].append(status)
    rows = []
    for interval, bucket in sorted(grouped, key=lambda key: (key[0], BUCKET_ORDER.index(key[1]))):
        pct = _pct_updated(grouped[(interval, bucket)])
        if pct is not None:
            rows.append({"interval": str(interval), "bucket": bucket, "pct_updated": pct})
    return pd.DataFrame(rows, columns=["interval", "bucket", "pct_updated"])


def _phrase_pattern(phrase: str) -> re.Pattern:
    return re.compile(r"(?<!\w)" + r"\s+".join(re.escape(w) for w in phrase.split()) + r"(?!\w)", re.IGNORECASE)


def select_rare_phrases(
    documents: Sequence[PolicyDocument], phrases: Sequence[str], baseline: Interval, max_baseline_freq: float
) -> List[str]:
    """Phrases whose relative document frequency in the baseline interval is below the limit."""
    texts = [visible_text(d.markdown) for d in documents if d.interval == baseline]
    selected = []
    for phrase in phrases:
        pattern = _phrase_pattern(phrase)
        hits = sum(1 for text in texts if pattern.search(text))
        frequency = hits / len(texts) if texts else 0.0
        if frequency < max_baseline_freq:
            selected.append(phrase)
    return selected


def _length_summary(group: str, lengths: List[int]) -> dict:
    if not lengths:
        return {"group": group, "documents": 0, "mean_update_length": None, "q1": None, "median": None, "q3": None}
    q1, median, q3 = np.percentile(np.array(lengths, dtype=float), [25, 50, 75])
    return {
        "group": group,
        "documents": len(lengths),
        "mean_update_length": round(float(np.mean(lengths)), 4),
        "q1": float(q1),
        "median": float(median),
        "q3": float(q3),
    }


def gdpr_validation(
    documents: Sequence[PolicyDocument],
    phrases: Sequence[str],
    baseline: Interval,
    target: Interval,
    max_baseline_freq: float = 0.01,
) -> Tuple[List[str], pd.DataFrame]:
    """Update length in the target interval for documents with and without the selected phrases."""
    selected = select_rare_phrases(documents, phrases, baseline, max_baseline_freq)
    patterns = [_phrase_pattern(p) for p in selected]
    previous = previous_interval(target)
    with_phrase: List[int] = []
    without_phrase: List[int] = []
    for site, timeline in sorted(by_site(documents).items()):
        if target not in timeline or previous not in timeline:
            continue
        current = timeline[target]
        length = update_length(timeline[previous].markdown, current.markdown)
        text = visible_text(current.markdown)
        (with_phrase if any(p.search(text) for p in patterns) else without_phrase).append(length)
    logger.info(f"{len(selected)} of {len(phrases)} phrases are rare in {baseline}")
    frame = pd.DataFrame(
        [_length_summary("with_phrase", with_phrase), _length_summary("without_phrase", without_phrase)],
        columns=["group", "documents", "mean_update_length", "q1", "median", "q3"],
    )
    return selected, frame
