import pytest

from app.core.config import RESOURCES_DIR
from app.core.language import UNDETERMINED, TrigramLanguageDetector, detect_language, is_english, trigrams

ENGLISH = (
    "When you visit our website we may collect information about your device and the pages you "
    "read. We use this information to improve the site and we do not sell it to anyone."
)
GERMAN = (
    "Wenn Sie unsere Webseite besuchen, speichern wir Informationen über Ihr Gerät und die Seiten, "
    "die Sie lesen. Wir verwenden diese Daten, um unser Angebot zu verbessern, und verkaufen sie nicht."
)


@pytest.fixture(scope="module")
def detector():
    return TrigramLanguageDetector.from_directory(RESOURCES_DIR / "languages")


def test_detects_english(detector):
    language, confidence = detector.detect(ENGLISH)
    assert language == "en"
    assert confidence > 0.5


def test_detects_german(detector):
    language, confidence = detector.detect(GERMAN)
    assert language == "de"
    assert confidence > 0.5


def test_short_text_is_undetermined(detector):
    assert detector.detect("Hello world") == (UNDETERMINED, 0.0)
    assert detect_language("", detector) == (UNDETERMINED, 0.0)
    assert detect_language(GERMAN, detector) == detector.detect(GERMAN)


def test_scores_sum_to_one(detector):
    scores = detector.scores(ENGLISH)
    assert set(scores) == {"de", "en", "es", "fr", "it", "nl", "pt"}
    assert sum(scores.values()) == pytest.approx(1.0)


def test_trigrams_pad_words():
    assert trigrams("ab") == {" ab": 1, "ab ": 1}


def test_empty_profiles_rejected():
    with pytest.raises(ValueError):
        TrigramLanguageDetector({})


@pytest.mark.parametrize(
    "language,confidence,allow_undetermined,expected",
    [
        ("en", 0.9, True, True),
        ("de", 0.9, True, False),
        ("de", 0.3, True, True),
        (UNDETERMINED, 0.0, True, True),
        (UNDETERMINED, 0.0, False, False),
    ],
)
def test_is_english(language, confidence, allow_undetermined, expected):
    assert is_english(language, confidence, 0.5, allow_undetermined) is expected
