import re
from datetime import date, datetime
from typing import Dict, List, Sequence, Set, Tuple

from app.core.errors import IntervalRangeError
from app.core.models import Half, Interval, SiteRecord

FIRST_ARCHIVE_YEAR = 1996

_INTERVAL_RE = re.compile(r"^(\d{4})([AB])$")


def interval_of(timestamp: datetime) -> Interval:
    if timestamp.year < FIRST_ARCHIVE_YEAR:
        raise IntervalRangeError(f"No archive intervals before {FIRST_ARCHIVE_YEAR}: {timestamp.isoformat()}")
    half = Half.A if timestamp.month <= 6 else Half.B
    return Interval(year=timestamp.year, half=half)


def midpoint(interval: Interval) -> date:
    if interval.half == Half.A:
        return date(interval.year, 3, 31)
    return date(interval.year, 9, 30)


def parse_interval(text: str) -> Interval:
    match = _INTERVAL_RE.match(text.strip())
    if not match:
        raise IntervalRangeError(f"Malformed interval: {text!r}")
    year = int(match.group(1))
    if year < FIRST_ARCHIVE_YEAR:
        raise IntervalRangeError(f"No archive intervals before {FIRST_ARCHIVE_YEAR}: {text}")
    return Interval(year=year, half=Half(match.group(2)))


def next_interval(interval: Interval) -> Interval:
    if interval.half == Half.A:
        return Interval(year=interval.year, half=Half.B)
    return Interval(year=interval.year + 1, half=Half.A)


def previous_interval(interval: Interval) -> Interval:
    if interval.half == Half.B:
        return Interval(year=interval.year, half=Half.A)
    return Interval(year=interval.year - 1, half=Half.B)


def interval_range(first: Interval, last: Interval) -> List[Interval]:
    intervals = []
    current = first
    while current <= last:
        intervals.append(current)
        current = next_interval(current)
    return intervals


def build_target_list(
    rank_lists: Sequence[Tuple[Interval, Sequence[str]]],
    cutoff: int,
    sites: Dict[str, SiteRecord] = None,
) -> Set[str]:
    """Union of the top `cutoff` domains of every rank list.

    Ranks of target domains are recorded into `sites` (created on demand)
    for every list entry, including positions beyond the cutoff, so a site
    that left the top list still carries its rank for that interval. A rank
    always comes from that interval's own list.
    """
    if sites is None:
        sites = {}
    targets: Set[str] = set()
    for _, domains in rank_lists:
        for domain in domains[:cutoff]:
            domain = domain.strip().lower()
            if domain:
                targets.add(domain)
    for interval, domains in rank_lists:
        for position, domain in enumerate(domains, start=1):
            domain = domain.strip().lower()
            if domain not in targets:
                continue
            record = sites.setdefault(domain, SiteRecord(domain=domain))
            record.ranks.setdefault(str(interval), position)
    return targets
