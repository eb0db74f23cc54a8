import random
from datetime import datetime, timedelta, timezone

import pytest

from app.core.intervals import interval_of, parse_interval
from app.core.models import SnapshotRef
from app.core.snapshots import (
    group_by_interval,
    language_check_order,
    midpoint_datetime,
    select_snapshot,
)


def ref(timestamp: str) -> SnapshotRef:
    return SnapshotRef(original_url="http://example.com/", timestamp=timestamp, status=200)


def stamp(moment: datetime) -> str:
    return moment.strftime("%Y%m%d%H%M%S")


def test_closer_capture_wins():
    chosen = select_snapshot([ref("20150101000000"), ref("20150320000000")], parse_interval("2015A"))
    assert chosen.timestamp == "20150320000000"


def test_no_capture_in_interval():
    assert select_snapshot([ref("20140505000000"), ref("20141201000000")], parse_interval("2015A")) is None


def test_equidistant_captures_prefer_earlier():
    chosen = select_snapshot([ref("20150401000000"), ref("20150330000000")], parse_interval("2015A"))
    assert chosen.timestamp == "20150330000000"


@pytest.mark.parametrize("seed", range(100))
def test_selection_matches_direct_distance(seed):
    rng = random.Random(seed)
    interval = parse_interval(f"{rng.randint(1997, 2019)}{rng.choice('AB')}")
    start = midpoint_datetime(interval) - timedelta(days=400)
    captures = [ref(stamp(start + timedelta(seconds=rng.randint(0, 800 * 86400)))) for _ in range(rng.randint(0, 12))]
    if captures and rng.random() < 0.3:
        mid = midpoint_datetime(interval)
        offset = timedelta(hours=rng.randint(1, 500))
        captures += [ref(stamp(mid - offset)), ref(stamp(mid + offset))]

    target = midpoint_datetime(interval)
    in_interval = [c for c in captures if interval_of(c.captured_at) == interval]
    chosen = select_snapshot(captures, interval)
    if not in_interval:
        assert chosen is None
        return
    best = min(abs((c.captured_at - target).total_seconds()) for c in in_interval)
    tied = sorted(c.timestamp for c in in_interval if abs((c.captured_at - target).total_seconds()) == best)
    assert chosen.timestamp == tied[0]


def test_selection_stable_when_adding_worse_candidates():
    interval = parse_interval("2016B")
    captures = [ref("20160915000000"), ref("20160801000000")]
    chosen = select_snapshot(captures, interval)
    worse = captures + [ref("20160701000000"), ref("20161230000000"), ref("20150930000000")]
    assert select_snapshot(worse, interval) == chosen


def test_group_by_interval():
    groups = group_by_interval([ref("20150101000000"), ref("20150701000000"), ref("20150702000000")])
    assert {str(k): len(v) for k, v in groups.items()} == {"2015A": 1, "2015B": 2}


def test_language_check_order_latest_first():
    captures = [ref(f"2015{month:02d}01000000") for month in range(1, 10)]
    order = language_check_order(captures, 3, random.Random(7))
    assert order[0].timestamp == "20150901000000"
    assert len(order) == 4
    assert len({r.timestamp for r in order}) == 4
    assert language_check_order([], 3, random.Random(0)) == []


def test_snapshot_ref_validates_fields():
    with pytest.raises(ValueError):
        SnapshotRef(original_url="http://x/", timestamp="2015", status=200)
    with pytest.raises(ValueError):
        SnapshotRef(original_url="http://x/", timestamp="20150101000000", status=700)
    assert ref("20150101000000").captured_at == datetime(2015, 1, 1, tzinfo=timezone.utc)
