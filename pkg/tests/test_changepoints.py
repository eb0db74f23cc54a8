import itertools
import math

import numpy as np
import pytest

from app.core.analysis.changepoints import (
    ChangePointConfig,
    changepoint_concentration,
    default_penalty,
    l2_mean_cost,
    pelt_changepoints,
)
from app.core.errors import ChangePointError
from tests.helpers import make_doc

PENALTIES = (0.05, 0.3, 1.5)


def exhaustive_changepoints(values, penalty):
    n = len(values)
    best_cost, best = math.inf, []
    for size in range(n):
        for cuts in itertools.combinations(range(1, n), size):
            bounds = (0,) + cuts + (n,)
            cost = sum(l2_mean_cost(values[a:b]) for a, b in zip(bounds, bounds[1:])) + penalty * size
            if cost < best_cost:
                best_cost, best = cost, list(cuts)
    return best


@pytest.mark.parametrize("penalty", PENALTIES)
@pytest.mark.parametrize("seed", range(200))
def test_pelt_matches_exhaustive_search(seed, penalty):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 13))
    values = rng.random(n)
    if seed % 4 == 0:
        values[n // 2:] += 2.0
    expected = exhaustive_changepoints(values, penalty)
    assert pelt_changepoints(values, ChangePointConfig(penalty=penalty)) == expected


def test_step_series():
    assert pelt_changepoints([0, 0, 0, 0, 10, 10, 10, 10], ChangePointConfig(penalty=1)) == [4]


def test_constant_series_has_no_changepoints():
    assert pelt_changepoints([0.3] * 8) == []
    assert pelt_changepoints([0.3] * 8, ChangePointConfig(penalty=1)) == []


def test_default_penalty_finds_planted_jump():
    values = [0, 0, 0, 0, 1, 1]
    assert default_penalty(values) == pytest.approx(2 * math.log(6) * np.var(values))
    assert pelt_changepoints(values) == [4]


def test_short_series_rejected():
    with pytest.raises(ChangePointError):
        pelt_changepoints([1.0])
    with pytest.raises(ValueError):
        ChangePointConfig(penalty=0)


INTERVALS = ["2014B", "2015A", "2015B", "2016A", "2016B", "2017A", "2017B", "2018A", "2018B"]
BASE = "We collect your email address when you register. We use it to send you updates."


def planted_corpus():
    documents = []
    for interval in INTERVALS:
        for site in ("a.com", "b.com", "c.com", "d.com"):
            text = BASE
            if interval >= "2018A":
                text += " Our lawful basis under the regulation is consent."
            documents.append(make_doc(site, interval, text))
    return documents


def test_concentration_on_planted_jump():
    counts = {str(k): v for k, v in changepoint_concentration(planted_corpus(), 1).items()}
    assert list(counts) == INTERVALS
    assert counts["2018A"] >= 1
    assert all(counts[interval] == 0 for interval in INTERVALS if interval != "2018A")


def test_concentration_of_constant_corpus_is_zero():
    documents = [make_doc(site, interval, BASE) for interval in INTERVALS for site in ("a.com", "b.com")]
    counts = changepoint_concentration(documents, 2)
    assert set(counts.values()) == {0}
    assert len(counts) == len(INTERVALS)
