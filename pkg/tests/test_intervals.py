from datetime import date, datetime

import pytest

from app.core.errors import IntervalRangeError
from app.core.intervals import (
    build_target_list,
    interval_of,
    interval_range,
    midpoint,
    next_interval,
    parse_interval,
    previous_interval,
)
from app.core.models import Half, Interval

YEARS = [1996, 1999, 2000, 2004, 2005, 2008, 2012, 2015, 2016, 2018, 2019]

BOUNDARY_CASES = (
    [(datetime(year, 1, 1, 0, 0, 0), f"{year}A") for year in YEARS]
    + [(datetime(year, 6, 30, 23, 59, 59), f"{year}A") for year in YEARS]
    + [(datetime(year, 7, 1, 0, 0, 0), f"{year}B") for year in YEARS]
    + [(datetime(year, 12, 31, 23, 59, 59), f"{year}B") for year in YEARS]
    + [
        (datetime(2005, 2, 10), "2005A"),
        (datetime(2005, 7, 1), "2005B"),
        (datetime(1999, 12, 31), "1999B"),
        (datetime(2016, 2, 29, 12), "2016A"),
        (datetime(2012, 3, 31), "2012A"),
        (datetime(2017, 9, 30), "2017B"),
    ]
)


@pytest.mark.parametrize("timestamp,expected", BOUNDARY_CASES)
def test_interval_of_table(timestamp, expected):
    interval = interval_of(timestamp)
    assert str(interval) == expected
    assert parse_interval(str(interval)) == interval
    assert interval_of(datetime.combine(midpoint(interval), datetime.min.time())) == interval


def test_boundary_table_has_fifty_cases():
    assert len(BOUNDARY_CASES) == 50


@pytest.mark.parametrize(
    "text,expected",
    [("2015A", date(2015, 3, 31)), ("2015B", date(2015, 9, 30)), ("1996A", date(1996, 3, 31))],
)
def test_midpoint(text, expected):
    assert midpoint(parse_interval(text)) == expected


def test_interval_of_rejects_pre_archive_years():
    with pytest.raises(IntervalRangeError):
        interval_of(datetime(1995, 12, 31))


@pytest.mark.parametrize("text", ["2015", "2015C", "15A", "1995A", " ", "2015a"])
def test_parse_interval_rejects_malformed(text):
    with pytest.raises(IntervalRangeError):
        parse_interval(text)


def test_ordering_year_then_half():
    intervals = [parse_interval(text) for text in ["2016A", "2015B", "2015A", "1996B"]]
    assert [str(i) for i in sorted(intervals)] == ["1996B", "2015A", "2015B", "2016A"]
    assert Interval(year=2015, half=Half.A) < Interval(year=2015, half=Half.B)


def test_next_and_previous_interval():
    assert str(next_interval(parse_interval("2015B"))) == "2016A"
    assert str(previous_interval(parse_interval("2016A"))) == "2015B"
    assert [str(i) for i in interval_range(parse_interval("2015B"), parse_interval("2017A"))] == [
        "2015B", "2016A", "2016B", "2017A",
    ]


def test_build_target_list_union_of_top_entries():
    lists = [(parse_interval("2015A"), ["a", "b", "c"]), (parse_interval("2015B"), ["b", "c", "d"])]
    sites = {}
    assert build_target_list(lists, 2, sites) == {"a", "b", "c"}
    assert sites["c"].ranks == {"2015A": 3, "2015B": 2}
    assert sites["b"].ranks == {"2015A": 2, "2015B": 1}
    assert "d" not in sites


def test_build_target_list_is_order_independent():
    lists = [(parse_interval("2015A"), ["a", "b", "c"]), (parse_interval("2015B"), ["b", "c", "d"])]
    assert build_target_list(lists, 2) == build_target_list(list(reversed(lists)), 2)


def test_build_target_list_edge_cases():
    assert build_target_list([], 10) == set()
    assert build_target_list([(parse_interval("2019A"), ["x"])], 100) == {"x"}
