import re
from dataclasses import dataclass, field
from typing import List

URL_TOKEN = "⟨URL⟩"
EMAIL_TOKEN = "⟨EMAIL⟩"
NUMBER_TOKEN = "⟨NUM⟩"
ENTITY_TOKEN = "⟨ENT⟩"

URL_RE = re.compile(r"(?:https?://|www\.)[^\s<>\"]*[^\s<>\".,;:!?)\]]", re.IGNORECASE)
EMAIL_RE = re.compile(r"[\w.+-]+@[\w-]+(?:\.[\w-]+)+")
NUMBER_RE = re.compile(r"(?<![⟨\w])\d+(?:[.,]\d+)*(?!\w)")
ENTITY_RE = re.compile(r"(?<![⟨\w])[A-Z][\w&'-]*(?:[ \t]+[A-Z][\w&'-]*)+")
_SENTENCE_BOUNDARY = ".!?:\n"


@dataclass
class Placeholders:
    """Normalized text and the originals each placeholder replaced."""

    text: str
    urls: List[str] = field(default_factory=list)
    emails: List[str] = field(default_factory=list)
    numbers: List[str] = field(default_factory=list)
    entities: List[str] = field(default_factory=list)


def _at_sentence_start(text: str, position: int) -> bool:
    before = text[:position].rstrip(" \t")
    return not before or before[-1] in _SENTENCE_BOUNDARY


def _replace(pattern: re.Pattern, token: str, text: str, found: List[str]) -> str:
    def substitute(match: re.Match) -> str:
        found.append(match.group(0))
        return token

    return pattern.sub(substitute, text)


def _replace_entities(text: str, found: List[str]) -> str:
    pieces = []
    last = 0
    for match in ENTITY_RE.finditer(text):
        start, span = match.start(), match.group(0)
        if _at_sentence_start(text, start):
            rest = re.split(r"[ \t]+", span, maxsplit=1)[1]
            if len(rest.split()) < 2:
                continue
            start = match.end() - len(rest)
            span = rest
        pieces.append(text[last:start])
        pieces.append(ENTITY_TOKEN)
        found.append(span)
        last = match.end()
    pieces.append(text[last:])
    return "".join(pieces)


def replace_placeholders(text: str) -> Placeholders:
    """URLs, then emails, then numbers, then capitalized multi-word names."""
    result = Placeholders(text=text)
    normalized = _replace(URL_RE, URL_TOKEN, text, result.urls)
    normalized = _replace(EMAIL_RE, EMAIL_TOKEN, normalized, result.emails)
    normalized = _replace(NUMBER_RE, NUMBER_TOKEN, normalized, result.numbers)
    result.text = _replace_entities(normalized, result.entities)
    return result


def normalize_placeholders(text: str) -> str:
    return replace_placeholders(text).text
