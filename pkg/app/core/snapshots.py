import random
from datetime import datetime, time, timezone
from typing import Dict, List, Optional, Sequence

from app.core.intervals import interval_of, midpoint
from app.core.models import Interval, SnapshotRef


def midpoint_datetime(interval: Interval) -> datetime:
    return datetime.combine(midpoint(interval), time(0, 0), tzinfo=timezone.utc)


def in_interval(ref: SnapshotRef, interval: Interval) -> bool:
    return ref.captured_at.year >= 1996 and interval_of(ref.captured_at) == interval


def select_snapshot(snapshots: Sequence[SnapshotRef], interval: Interval) -> Optional[SnapshotRef]:
    """Capture in `interval` closest to its midpoint; the earlier one on a tie."""
    target = midpoint_datetime(interval)
    candidates = [ref for ref in snapshots if in_interval(ref, interval)]
    if not candidates:
        return None
    return min(candidates, key=lambda ref: (abs((ref.captured_at - target).total_seconds()), ref.timestamp))


def group_by_interval(snapshots: Sequence[SnapshotRef]) -> Dict[Interval, List[SnapshotRef]]:
    groups: Dict[Interval, List[SnapshotRef]] = {}
    for ref in snapshots:
        if ref.captured_at.year < 1996:
            continue
        groups.setdefault(interval_of(ref.captured_at), []).append(ref)
    return groups


def language_check_order(snapshots: Sequence[SnapshotRef], fallbacks: int, rng: random.Random) -> List[SnapshotRef]:
    """Most recent capture first, then up to `fallbacks` random others."""
    ordered = sorted(snapshots, key=lambda ref: ref.timestamp)
    if not ordered:
        return []
    latest, rest = ordered[-1], ordered[:-1]
    return [latest] + rng.sample(rest, min(fallbacks, len(rest)))
