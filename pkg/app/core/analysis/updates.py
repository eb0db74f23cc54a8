import difflib
from enum import Enum
from typing import Dict, Mapping

from app.core.intervals import previous_interval
from app.core.models import Interval

SIMILARITY_THRESHOLD = 95


class UpdateStatus(str, Enum):
    UPDATED = "updated"
    UNCHANGED = "unchanged"
    SKIPPED = "skipped"


def similarity_ratio(a: str, b: str) -> int:
    """Ratcliff/Obershelp similarity on characters, 0..100.

    difflib's matcher without its junk heuristic is exactly the recursive
    longest-common-substring matching.
    """
    if not a and not b:
        return 100
    ratio = difflib.SequenceMatcher(None, a, b, autojunk=False).ratio()
    return int(round(100 * ratio))


def detect_updates(
    documents: Mapping[Interval, str], threshold: int = SIMILARITY_THRESHOLD
) -> Dict[Interval, UpdateStatus]:
    """Compare each interval's text with the immediately preceding interval's.

    The first interval and intervals after a gap are skipped. An update is
    a similarity ratio at or below `threshold`.
    """
    statuses = {}
    for interval in sorted(documents):
        previous = previous_interval(interval)
        if previous not in documents:
            statuses[interval] = UpdateStatus.SKIPPED
            continue
        ratio = similarity_ratio(documents[previous], documents[interval])
        statuses[interval] = UpdateStatus.UPDATED if ratio <= threshold else UpdateStatus.UNCHANGED
    return statuses


def update_length(previous: str, current: str) -> int:
    """Added minus deleted lines of a line diff."""
    a, b = previous.splitlines(), current.splitlines()
    added = deleted = 0
    for tag, i1, i2, j1, j2 in difflib.SequenceMatcher(None, a, b, autojunk=False).get_opcodes():
        if tag in ("replace", "delete"):
            deleted += i2 - i1
        if tag in ("replace", "insert"):
            added += j2 - j1
    return added - deleted
