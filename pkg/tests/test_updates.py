import random

import pytest

from app.core.analysis.updates import UpdateStatus, detect_updates, similarity_ratio, update_length
from app.core.intervals import parse_interval


def longest_block(a, b, alo, ahi, blo, bhi):
    """Longest common substring of a[alo:ahi] and b[blo:bhi] from a common-suffix table.

    Ties go to the earliest start in a, then the earliest start in b.
    """
    best = (alo, blo, 0)
    previous = [0] * (bhi - blo + 1)
    for i in range(alo, ahi):
        current = [0] * (bhi - blo + 1)
        for j in range(blo, bhi):
            if a[i] == b[j]:
                size = previous[j - blo] + 1
                current[j - blo + 1] = size
                start = (i - size + 1, j - size + 1)
                if size > best[2] or (size == best[2] and start < best[:2]):
                    best = (start[0], start[1], size)
        previous = current
    return best


def matched_characters(a, b):
    matched = 0
    pending = [(0, len(a), 0, len(b))]
    while pending:
        alo, ahi, blo, bhi = pending.pop()
        if alo >= ahi or blo >= bhi:
            continue
        i, j, size = longest_block(a, b, alo, ahi, blo, bhi)
        if size == 0:
            continue
        matched += size
        pending.append((alo, i, blo, j))
        pending.append((i + size, ahi, j + size, bhi))
    return matched


def oracle_ratio(a, b):
    if not a and not b:
        return 100
    return int(round(100 * (2.0 * matched_characters(a, b) / (len(a) + len(b)))))


@pytest.mark.parametrize("chunk", range(10))
def test_similarity_matches_oracle(chunk):
    rng = random.Random(chunk)
    for _ in range(100):
        alphabet = rng.choice(["ab", "abc", "abcd", "abcdefgh"])
        a = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 64)))
        b = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 64)))
        assert similarity_ratio(a, b) == oracle_ratio(a, b), (a, b)


@pytest.mark.parametrize(
    "a,b,expected",
    [("abcd", "abcd", 100), ("", "", 100), ("", "abc", 0), ("abc", "", 0), ("abcd", "abce", 75), ("abc", "xyz", 0)],
)
def test_similarity_boundaries(a, b, expected):
    assert similarity_ratio(a, b) == expected


def test_detect_updates_skips_first_and_gaps():
    documents = {
        parse_interval("2015A"): "We collect your email address.",
        parse_interval("2015B"): "We collect your email address.",
        parse_interval("2016A"): "We collect your email address and phone number, and share them.",
        parse_interval("2017A"): "Something else entirely.",
    }
    statuses = {str(k): v for k, v in detect_updates(documents).items()}
    assert statuses == {
        "2015A": UpdateStatus.SKIPPED,
        "2015B": UpdateStatus.UNCHANGED,
        "2016A": UpdateStatus.UPDATED,
        "2017A": UpdateStatus.SKIPPED,
    }


def test_threshold_is_inclusive():
    documents = {parse_interval("2015A"): "abcd", parse_interval("2015B"): "abce"}
    assert detect_updates(documents, threshold=75)[parse_interval("2015B")] == UpdateStatus.UPDATED
    assert detect_updates(documents, threshold=74)[parse_interval("2015B")] == UpdateStatus.UNCHANGED


def test_update_length_counts_lines():
    assert update_length("a\nb\nc", "a\nB\nc\nd") == 1
    assert update_length("a\nb\nc", "a") == -2
    assert update_length("same", "same") == 0


@pytest.mark.parametrize("seed", range(100))
def test_update_length_is_antisymmetric(seed):
    rng = random.Random(seed)
    lines = ["We collect data.", "We share data.", "Contact us.", "Cookies.", ""]
    a = "\n".join(rng.choice(lines) for _ in range(rng.randint(0, 12)))
    b = "\n".join(rng.choice(lines) for _ in range(rng.randint(0, 12)))
    assert update_length(a, b) == -update_length(b, a)


def test_similarity_is_symmetric_on_single_edit():
    assert similarity_ratio("abce", "abcd") == similarity_ratio("abcd", "abce") == 75
