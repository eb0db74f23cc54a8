import pytest

from app.core.analysis.lemmatizer import Lemmatizer, lemmatize, load_exceptions
from app.core.analysis.placeholders import normalize_placeholders, replace_placeholders
from app.core.config import RESOURCES_DIR


@pytest.mark.parametrize(
    "token,lemma",
    [
        ("policies", "policy"),
        ("Policies", "policy"),
        ("data", "data"),
        ("running", "run"),
        ("stopped", "stop"),
        ("classes", "class"),
        ("processing", "process"),
        ("analytics", "analytic"),
        ("status", "status"),
        ("agreed", "agreed"),
        ("is", "is"),
        ("id123", "id123"),
    ],
)
def test_rules(token, lemma):
    assert lemmatize(token) == lemma


def test_exceptions_take_precedence():
    lemmatizer = Lemmatizer.from_file(RESOURCES_DIR / "lemma_exceptions.txt")
    assert lemmatize("cookies") == "cooky"
    assert lemmatizer("cookies") == "cookie"
    assert lemmatizer("children") == "child"
    assert lemmatizer("used") == "use"
    assert lemmatizer("Cookies") == "cookie"


def test_load_exceptions_skips_comments(tmp_path):
    path = tmp_path / "exceptions.txt"
    path.write_text("# irregulars\nmice mouse\n\nGeese goose  # plural\nbroken line here\n", encoding="utf-8")
    assert load_exceptions(path) == {"mice": "mouse", "geese": "goose"}


@pytest.mark.parametrize(
    "text,expected",
    [
        ("contact us at a@b.com", "contact us at ⟨EMAIL⟩"),
        ("visit http://x.com/p", "visit ⟨URL⟩"),
        ("we share with Acme Analytics today", "we share with ⟨ENT⟩ today"),
        ("see www.example.com/privacy.", "see ⟨URL⟩."),
        ("We keep logs for 30 days and 1,000.5 records", "We keep logs for ⟨NUM⟩ days and ⟨NUM⟩ records"),
        ("see http://x.com/2019 for version2", "see ⟨URL⟩ for version2"),
        ("Acme Analytics receives data.", "Acme Analytics receives data."),
        ("We share it with Acme Analytics Group.", "We share it with ⟨ENT⟩."),
    ],
)
def test_normalize_placeholders(text, expected):
    assert normalize_placeholders(text) == expected


def test_sentence_start_drops_first_word():
    result = replace_placeholders("Google Analytics Premium is used. Mail privacy@acme.com now.")
    assert result.text == "Google ⟨ENT⟩ is used. Mail ⟨EMAIL⟩ now."
    assert result.entities == ["Analytics Premium"]
    assert result.emails == ["privacy@acme.com"]
