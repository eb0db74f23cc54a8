"""Per-site crawl logic: site language probing and the per-interval attempt."""

import logging
import random
from typing import List, Optional, Sequence, Tuple

from app.core.errors import ArchiveError, NotArchivedError, OutOfIntervalRedirectError
from app.core.extraction import (
    BLANK_THRESHOLD,
    DEFAULT_LINK_PATTERNS,
    LinkPattern,
    find_policy_links,
    is_blank,
    is_pdf_link,
    page_markdown,
    visible_text,
)
from app.core.interfaces import IArchiveClient, ICorpusStorage, ILanguageDetector
from app.core.intervals import interval_of
from app.core.language import UNDETERMINED, detect_language, is_english
from app.core.models import (
    PDF_CANDIDATE,
    SUCCESS,
    AttemptRecord,
    FailureCause,
    Interval,
    SnapshotRef,
)
from app.core.snapshots import language_check_order, select_snapshot

logger = logging.getLogger(__name__)

HOMEPAGE_HTML = "homepage.html"
POLICY_HTML = "policy.html"


def detect_site_language(
    snapshots: Sequence[SnapshotRef],
    archive: IArchiveClient,
    detector: ILanguageDetector,
    rng: random.Random,
    fallbacks: int = 3,
) -> Tuple[str, float]:
    """Language of the most recent loadable homepage capture.

    When the latest capture cannot be fetched, up to `fallbacks` random
    other captures are tried. A site with nothing loadable is undetermined.
    """
    for ref in language_check_order(snapshots, fallbacks, rng):
        try:
            page = archive.fetch_snapshot(ref, interval_of(ref.captured_at))
        except (ArchiveError, ValueError) as e:
            logger.warning(f"Language check of {ref.original_url} at {ref.timestamp} failed: {str(e)}")
            continue
        return detect_language(visible_text(page_markdown(page.body)), detector)
    return UNDETERMINED, 0.0


class SiteCrawler:
    """Runs one (site, interval) attempt from homepage capture to raw policy capture."""

    def __init__(
        self,
        archive: IArchiveClient,
        storage: ICorpusStorage,
        detector: ILanguageDetector,
        patterns: Sequence[LinkPattern] = DEFAULT_LINK_PATTERNS,
        blank_threshold: int = BLANK_THRESHOLD,
        min_language_confidence: float = 0.5,
    ):
        self.archive = archive
        self.storage = storage
        self.detector = detector
        self.patterns = list(patterns)
        self.blank_threshold = blank_threshold
        self.min_language_confidence = min_language_confidence

    def crawl(self, site: str, interval: Interval, snapshots: Sequence[SnapshotRef]) -> Optional[AttemptRecord]:
        """None when the site has no homepage capture in the interval."""
        ref = select_snapshot(snapshots, interval)
        if ref is None:
            return None
        record = AttemptRecord(site=site, interval=str(interval), outcome=SUCCESS, homepage_timestamp=ref.timestamp)
        try:
            page = self.archive.fetch_snapshot(ref, interval)
        except OutOfIntervalRedirectError as e:
            logger.info(f"{site} {interval}: {str(e)}")
            return self._fail(record, FailureCause.OUT_OF_INTERVAL_REDIRECT)
        except ArchiveError as e:
            logger.error(f"{site} {interval}: homepage fetch failed: {str(e)}")
            return self._fail(record, FailureCause.FETCH_ERROR)
        record.homepage_final_url = page.final_url
        self.storage.save_capture(site, str(interval), HOMEPAGE_HTML, page.body)

        markdown = page_markdown(page.body)
        if is_blank(markdown, self.blank_threshold):
            return self._fail(record, FailureCause.BLANK_HOMEPAGE)
        language, confidence = detect_language(visible_text(markdown), self.detector)
        record.language = language
        if not is_english(language, confidence, self.min_language_confidence):
            return self._fail(record, FailureCause.NON_ENGLISH_HOMEPAGE)

        candidates = find_policy_links(page.body, page.final_url, self.patterns)
        if not candidates:
            return self._fail(record, FailureCause.NO_POLICY_LINK)
        return self._fetch_policy(record, interval, candidates)

    def _fetch_policy(self, record: AttemptRecord, interval: Interval, candidates: List) -> AttemptRecord:
        failure = FailureCause.POLICY_NOT_ARCHIVED
        for candidate in candidates:
            record.policy_url = candidate.href
            record.link_text = candidate.link_text
            record.link_pattern = candidate.pattern
            if is_pdf_link(candidate.href):
                record.outcome = PDF_CANDIDATE
                return record
            try:
                captures = self.archive.list_snapshots(candidate.href)
            except ArchiveError as e:
                logger.error(f"{record.site} {interval}: CDX lookup for {candidate.href} failed: {str(e)}")
                failure = FailureCause.FETCH_ERROR
                continue
            policy_ref = select_snapshot(captures, interval)
            if policy_ref is None:
                continue
            try:
                page = self.archive.fetch_snapshot(policy_ref, interval)
            except OutOfIntervalRedirectError:
                failure = FailureCause.OUT_OF_INTERVAL_REDIRECT
                continue
            except NotArchivedError:
                continue
            except ArchiveError as e:
                logger.error(f"{record.site} {interval}: policy fetch failed: {str(e)}")
                failure = FailureCause.FETCH_ERROR
                continue
            record.policy_url = page.final_url
            record.policy_timestamp = page.final_timestamp
            self.storage.save_capture(record.site, str(interval), POLICY_HTML, page.body)
            record.outcome = SUCCESS
            return record
        record.policy_url = record.link_text = record.link_pattern = ""
        return self._fail(record, failure)

    @staticmethod
    def _fail(record: AttemptRecord, cause: FailureCause) -> AttemptRecord:
        record.outcome = cause.value
        return record
