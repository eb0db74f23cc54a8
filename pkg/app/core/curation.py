"""Cleaning of the crawled corpus: parked domains, cross-origin redirects, shared policy URLs."""

import logging
from collections import Counter
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple
from urllib.parse import urlsplit

from pydantic import BaseModel

from app.core.models import SUCCESS, AttemptRecord, FailureCause

logger = logging.getLogger(__name__)

Records = List[AttemptRecord]


class PublicSuffixes:
    def __init__(self, suffixes: Iterable[str]):
        self.suffixes: FrozenSet[str] = frozenset(s.strip().lower().lstrip(".") for s in suffixes if s.strip())

    @classmethod
    def from_file(cls, path: Path) -> "PublicSuffixes":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls(line for line in lines if line.strip() and not line.lstrip().startswith("#"))

    def registrable_domain(self, host: str) -> Tuple[str, str]:
        """(registrable domain, its leftmost label) of a host name or URL.

        The longest listed suffix wins; a host under no listed suffix is
        treated as having a one-label suffix.
        """
        host = _host(host)
        labels = host.split(".") if host else []
        if len(labels) < 2:
            return host, host
        suffix_len = 1
        for i in range(len(labels)):
            if ".".join(labels[i:]) in self.suffixes:
                suffix_len = len(labels) - i
                break
        if suffix_len >= len(labels):
            return host, labels[0]
        registrable = labels[-(suffix_len + 1):]
        return ".".join(registrable), registrable[0]


def _host(value: str) -> str:
    value = value.strip().lower()
    if "://" in value:
        value = urlsplit(value).hostname or ""
    else:
        value = value.split("/", 1)[0].split(":", 1)[0]
    return value.rstrip(".")


def normalize_policy_url(url: str) -> str:
    """Lowercase host, no scheme, no trailing slash, no fragment; query kept."""
    parts = urlsplit(url.strip())
    host = (parts.hostname or "").lower()
    if parts.port:
        host = f"{host}:{parts.port}"
    path = parts.path.rstrip("/")
    key = host + path
    if parts.query:
        key += "?" + parts.query
    return key


def filter_parked(
    policies: Sequence[AttemptRecord], parking_domains: Iterable[str], suffixes: PublicSuffixes
) -> Tuple[Records, Records]:
    """Drop policies served by a parking provider for some other site."""
    parking = frozenset(d.strip().lower() for d in parking_domains)
    kept, removed = [], []
    for record in policies:
        policy_domain, _ = suffixes.registrable_domain(record.policy_url)
        site_domain, _ = suffixes.registrable_domain(record.site)
        if policy_domain in parking and site_domain not in parking:
            removed.append(record)
        else:
            kept.append(record)
    return kept, removed


def filter_cohr(
    policies: Sequence[AttemptRecord],
    suffixes: PublicSuffixes,
    redirect_log: Optional[Mapping[Tuple[str, str], str]] = None,
) -> Tuple[Records, Records]:
    """Drop policies whose homepage visit ended on another organisation's domain.

    `redirect_log` maps (site, interval) to the final homepage URL; by
    default it is read off the records themselves. Domains sharing their
    leftmost label (google.com and google.ca) count as the same owner.
    """
    kept, removed = [], []
    for record in policies:
        final_url = (redirect_log or {}).get(record.key, record.homepage_final_url)
        if not final_url:
            kept.append(record)
            continue
        site_domain, site_label = suffixes.registrable_domain(record.site)
        final_domain, final_label = suffixes.registrable_domain(final_url)
        if final_domain != site_domain and final_label != site_label:
            removed.append(record)
        else:
            kept.append(record)
    return kept, removed


def dedup_by_policy_url(policies: Sequence[AttemptRecord], suffixes: PublicSuffixes) -> Tuple[Records, Records]:
    """Keep one site per (policy URL, interval).

    The winner is the site whose homepage (its final URL when one was
    recorded) is on the policy's registrable domain; ties go to the
    lexicographically smallest site.
    """
    groups: Dict[Tuple[str, str], Records] = {}
    for record in policies:
        groups.setdefault((normalize_policy_url(record.policy_url), record.interval), []).append(record)
    winners = set()
    for records in groups.values():
        def preference(record: AttemptRecord):
            homepage_domain, _ = suffixes.registrable_domain(record.homepage_final_url or record.site)
            policy_domain, _ = suffixes.registrable_domain(record.policy_url)
            return (homepage_domain != policy_domain, record.site)

        winners.add(id(min(records, key=preference)))
    kept = [record for record in policies if id(record) in winners]
    removed = [record for record in policies if id(record) not in winners]
    return kept, removed


class CurationStage(BaseModel):
    stage: str
    removed_count: int
    kept_count: int


class CurationResult(BaseModel):
    kept: Records
    removed: Dict[str, Records]
    stages: List[CurationStage]


def curate(policies: Sequence[AttemptRecord], parking_domains: Iterable[str], suffixes: PublicSuffixes) -> CurationResult:
    """parked -> COHR -> dedup, in that order."""
    current = [record for record in policies if record.outcome == SUCCESS]
    removed: Dict[str, Records] = {}
    stages = []
    for name, step in (
        ("parked", lambda records: filter_parked(records, parking_domains, suffixes)),
        ("cohr", lambda records: filter_cohr(records, suffixes)),
        ("dedup", lambda records: dedup_by_policy_url(records, suffixes)),
    ):
        current, dropped = step(current)
        removed[name] = dropped
        stages.append(CurationStage(stage=name, removed_count=len(dropped), kept_count=len(current)))
        logger.info(f"Curation {name}: removed {len(dropped)}, kept {len(current)}")
    return CurationResult(kept=current, removed=removed, stages=stages)


class FailureRow(BaseModel):
    cause: str
    count: int
    percent: float


def failure_stats(records: Sequence[AttemptRecord]) -> List[FailureRow]:
    """Failure causes over all homepage snapshot attempts, most common first."""
    if not records:
        return []
    causes = {cause.value for cause in FailureCause}
    counts = Counter(record.outcome for record in records if record.outcome in causes)
    total = len(records)
    rows = [
        FailureRow(cause=cause, count=count, percent=round(100.0 * count / total, 2))
        for cause, count in counts.items()
    ]
    rows.sort(key=lambda row: (-row.count, row.cause))
    return rows
