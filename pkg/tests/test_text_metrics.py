import random

import pytest

from app.core.analysis.text_metrics import fkgl, split_sentences, syllables, word_count, words
from app.core.errors import UndefinedReadabilityError


@pytest.mark.parametrize(
    "text,expected",
    [
        ("The cat sat on the mat.", -1.45),
        ("The cat sat. The dog ran.", -2.62),
        ("Information is collected automatically.", 27.27),
        ("We use cookies. You can opt out.", -0.74),
        ("Privacy matters!", 14.69),
    ],
)
def test_fkgl_fixtures(text, expected):
    assert fkgl(text) == pytest.approx(expected, abs=0.01)


@pytest.mark.parametrize(
    "word,count",
    [("the", 1), ("use", 1), ("cookies", 2), ("privacy", 3), ("information", 4), ("automatically", 6), ("rhythm", 1), ("b", 1)],
)
def test_syllables(word, count):
    assert syllables(word) == count


def test_sentences_and_words():
    assert split_sentences("One here. Two there! Three? ...") == ["One here", "Two there", "Three"]
    assert words("We don't sell it.") == ["We", "don't", "sell", "it"]
    assert word_count("# Title\n\nSome **bold** text.") == 4


def test_undefined_readability():
    with pytest.raises(UndefinedReadabilityError):
        fkgl("")
    with pytest.raises(UndefinedReadabilityError):
        fkgl("... !!!")


VOCABULARY = "we collect data about you and share it with partners when you visit our site".split()


@pytest.mark.parametrize("seed", range(100))
def test_more_syllables_never_lower_grade(seed):
    rng = random.Random(seed)
    sentences = [" ".join(rng.choice(VOCABULARY) for _ in range(rng.randint(3, 12))) for _ in range(rng.randint(1, 4))]
    text = ". ".join(s.capitalize() for s in sentences) + "."
    tokens = text.split(" ")
    position = rng.randrange(len(tokens))
    stem = tokens[position].rstrip(".")
    tokens[position] = stem + "ta" + tokens[position][len(stem):]
    perturbed = " ".join(tokens)
    assert syllables(stem + "ta") > syllables(stem)
    assert len(words(perturbed)) == len(words(text))
    assert fkgl(perturbed) > fkgl(text)


@pytest.mark.parametrize("seed", range(100))
def test_grade_ignores_sentence_order(seed):
    rng = random.Random(seed)
    sentences = [" ".join(rng.choice(VOCABULARY) for _ in range(rng.randint(1, 12))).capitalize() for _ in range(rng.randint(1, 6))]
    shuffled = sentences[:]
    rng.shuffle(shuffled)
    assert fkgl(". ".join(shuffled) + ".") == fkgl(". ".join(sentences) + ".")
