import re
from typing import List

from app.core.errors import UndefinedReadabilityError
from app.core.extraction import visible_text

_SENTENCE_END = re.compile(r"[.!?]+(?=\s|$)")
_WORD = re.compile(r"[A-Za-z0-9]+(?:['’][A-Za-z]+)*")
_VOWEL_RUN = re.compile(r"[aeiouy]+")


def word_count(markdown: str) -> int:
    return len(visible_text(markdown).split())


def split_sentences(text: str) -> List[str]:
    return [part.strip() for part in _SENTENCE_END.split(text) if _WORD.search(part)]


def words(text: str) -> List[str]:
    return _WORD.findall(text)


def syllables(word: str) -> int:
    """Vowel groups, minus a silent trailing 'e', at least one."""
    word = word.lower()
    count = len(_VOWEL_RUN.findall(word))
    if word.endswith("e"):
        count -= 1
    return max(1, count)


def fkgl(text: str) -> float:
    """Flesch-Kincaid grade level of plain text."""
    sentences = split_sentences(text)
    tokens = words(text)
    if not sentences or not tokens:
        raise UndefinedReadabilityError("Text has no sentences")
    total_syllables = sum(syllables(token) for token in tokens)
    return 0.39 * (len(tokens) / len(sentences)) + 11.8 * (total_syllables / len(tokens)) - 15.59
