import logging
import re
import time
from typing import List, Optional
from urllib.parse import urljoin, urlparse

import requests

from app.adapters.rate_limiter import RateLimiter
from app.core.errors import (
    FetchError,
    LiveWebEscapeError,
    NotArchivedError,
    OutOfIntervalRedirectError,
    RateLimitedError,
)
from app.core.interfaces import IArchiveClient
from app.core.intervals import interval_of
from app.core.models import ArchivedPage, Interval, SnapshotRef, parse_timestamp

logger = logging.getLogger(__name__)

THROTTLE_STATUSES = (429, 503)
CDX_FIELDS = ["urlkey", "timestamp", "original", "mimetype", "statuscode", "digest", "length"]
_WAYBACK_PATH_RE = re.compile(r"^/web/(\d{14})(?:[a-z]{2}_)?/(.+)$")


def raw_capture_url(endpoint: str, timestamp: str, original_url: str) -> str:
    return f"{endpoint}/web/{timestamp}id_/{original_url}"


def parse_capture_url(url: str) -> Optional[tuple]:
    """Split an archive capture URL into (timestamp, original URL)."""
    parsed = urlparse(url)
    path = parsed.path + (f"?{parsed.query}" if parsed.query else "")
    match = _WAYBACK_PATH_RE.match(path)
    if not match:
        return None
    original = match.group(2)
    # collapsed "http:/host" forms show up behind some proxies
    original = re.sub(r"^(https?:)/(?!/)", r"\1//", original)
    return match.group(1), original


class WaybackArchiveClient(IArchiveClient):
    """CDX listing and raw-capture fetching against one archive host.

    Every request goes through the shared RateLimiter and targets the
    archive host only; redirects are followed by hand so a Location that
    points at the live web is refused before any request is made.
    """

    def __init__(
        self,
        endpoint: str,
        limiter: RateLimiter,
        session: Optional[requests.Session] = None,
        timeout: float = 30.0,
        max_retries: int = 3,
        max_redirects: int = 5,
        retry_base_delay: float = 1.0,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.archive_netloc = urlparse(self.endpoint).netloc
        self.limiter = limiter
        self.session = session or requests.Session()
        self.timeout = timeout
        self.max_retries = max_retries
        self.max_redirects = max_redirects
        self.retry_base_delay = retry_base_delay
        self.requested_hosts = set()

    def list_snapshots(self, url: str) -> List[SnapshotRef]:
        response = self._get_with_retry(
            f"{self.endpoint}/cdx/search/cdx", params={"url": url, "output": "json"}
        )
        if response.status_code == 404:
            return []
        if response.status_code != 200:
            raise FetchError(f"CDX query for {url} failed with HTTP {response.status_code}")
        if not response.content.strip():
            return []
        try:
            rows = response.json()
        except ValueError as e:
            logger.error(f"Invalid JSON from CDX API for {url}: {str(e)}")
            raise FetchError(f"Invalid CDX response for {url}") from e
        if not isinstance(rows, list) or not rows:
            return []
        snapshots = self._parse_cdx_rows(rows, url)
        snapshots.sort(key=lambda ref: ref.timestamp)
        logger.debug(f"CDX returned {len(snapshots)} captures for {url}")
        return snapshots

    def _parse_cdx_rows(self, rows: list, url: str) -> List[SnapshotRef]:
        header = rows[0] if rows and rows[0] and rows[0][0] == "urlkey" else None
        fields = header or CDX_FIELDS
        body = rows[1:] if header else rows
        snapshots = []
        for row in body:
            try:
                entry = dict(zip(fields, row))
                snapshots.append(
                    SnapshotRef(
                        original_url=entry["original"],
                        timestamp=entry["timestamp"],
                        status=int(entry["statuscode"]),
                        mime=entry.get("mimetype", ""),
                        digest=entry.get("digest", ""),
                    )
                )
            except (KeyError, ValueError, TypeError) as e:
                logger.warning(f"Skipping malformed CDX row for {url}: {row!r} ({str(e)})")
        return snapshots

    def fetch_snapshot(self, ref: SnapshotRef, interval: Interval) -> ArchivedPage:
        if interval_of(ref.captured_at) != interval:
            raise ValueError(f"Snapshot {ref.timestamp} is not in interval {interval}")
        url = raw_capture_url(self.endpoint, ref.timestamp, ref.original_url)
        timestamp, original = ref.timestamp, ref.original_url
        for _ in range(self.max_redirects + 1):
            response = self._get_with_retry(url)
            if response.is_redirect:
                url, timestamp, original = self._follow(url, response, interval)
                continue
            if response.status_code == 404:
                raise NotArchivedError(f"{original} is not archived at {timestamp}")
            if response.status_code >= 400:
                raise FetchError(f"Fetching {url} failed with HTTP {response.status_code}")
            return ArchivedPage(
                final_url=original,
                final_timestamp=timestamp,
                body=response.content,
                content_type=response.headers.get("Content-Type", ""),
            )
        raise FetchError(f"Too many archive redirects starting from {ref.original_url}")

    def _follow(self, url: str, response: requests.Response, interval: Interval) -> tuple:
        location = urljoin(url, response.headers.get("Location", ""))
        if urlparse(location).netloc != self.archive_netloc:
            raise LiveWebEscapeError(f"Refusing redirect off the archive: {location}")
        capture = parse_capture_url(location)
        if capture is None:
            raise FetchError(f"Unrecognized archive redirect: {location}")
        timestamp, original = capture
        if interval_of(parse_timestamp(timestamp)) != interval:
            raise OutOfIntervalRedirectError(timestamp, str(interval))
        return raw_capture_url(self.endpoint, timestamp, original), timestamp, original

    def _get_with_retry(self, url: str, params: Optional[dict] = None) -> requests.Response:
        attempt = 0
        while True:
            try:
                return self._get(url, params)
            except (RateLimitedError, FetchError) as e:
                if isinstance(e, LiveWebEscapeError) or attempt >= self.max_retries:
                    raise
                attempt += 1
                if isinstance(e, FetchError):
                    delay = self.retry_base_delay * 2 ** (attempt - 1)
                    logger.warning(f"Retry {attempt} for {url} in {delay}s: {str(e)}")
                    time.sleep(delay)

    def _get(self, url: str, params: Optional[dict] = None) -> requests.Response:
        if urlparse(url).netloc != self.archive_netloc:
            raise LiveWebEscapeError(f"Refusing request to non-archive host: {url}")
        with self.limiter.slot() as started_at:
            self.requested_hosts.add(self.archive_netloc)
            try:
                response = self.session.get(url, params=params, timeout=self.timeout, allow_redirects=False)
            except requests.RequestException as e:
                logger.error(f"Error requesting {url}: {str(e)}")
                raise FetchError(str(e)) from e
        if response.status_code in THROTTLE_STATUSES:
            self.limiter.record_throttle(started_at, response.status_code)
            raise RateLimitedError(response.status_code)
        self.limiter.record_success()
        return response
