"""Term matchers for third parties, tracking technologies and self-regulatory bodies."""

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

from pydantic import BaseModel

from app.core.analysis.links import outbound_links
from app.core.extraction import visible_text
from app.core.models import Interval, PolicyDocument

logger = logging.getLogger(__name__)

_HEADER = re.compile(r"^\[matcher\s+([^\]]+)\]$")


@dataclass
class Matcher:
    """Matches a document naming the organisation or linking to one of its domains."""

    name: str
    pack: str = ""
    name_patterns: List[re.Pattern] = field(default_factory=list)
    link_patterns: List[re.Pattern] = field(default_factory=list)

    def matches_text(self, text: str) -> bool:
        return any(pattern.search(text) for pattern in self.name_patterns)

    def matches_links(self, hrefs: Iterable[str]) -> bool:
        return any(pattern.search(href) for href in hrefs for pattern in self.link_patterns)

    def matches(self, markdown: str) -> bool:
        if self.matches_text(visible_text(markdown)):
            return True
        return bool(self.link_patterns) and self.matches_links(link.href for link in outbound_links(markdown))


def parse_matcher_pack(text: str, pack: str = "") -> List[Matcher]:
    """Read `[matcher <id>]` sections holding `name:` and `link:` pattern lines."""
    matchers = []
    current: Optional[dict] = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        header = _HEADER.match(line)
        if header:
            current = {"name": header.group(1).strip(), "pack": pack, "name_patterns": [], "link_patterns": []}
            matchers.append(current)
            continue
        key, _, pattern = line.partition(":")
        key = key.strip().lower()
        if current is None or key not in ("name", "link") or not pattern.strip():
            logger.warning(f"Skipping malformed matcher line {number} in {pack or 'pack'}: {raw!r}")
            continue
        try:
            compiled = re.compile(pattern.strip(), re.IGNORECASE)
        except re.error as e:
            logger.warning(f"Skipping invalid pattern on line {number} in {pack or 'pack'}: {str(e)}")
            continue
        current[f"{key}_patterns"].append(compiled)
    return [Matcher(**m) for m in matchers]


def load_matchers(directory: Path) -> List[Matcher]:
    matchers = []
    for path in sorted(Path(directory).glob("*.txt")):
        matchers.extend(parse_matcher_pack(path.read_text(encoding="utf-8"), pack=path.stem))
    logger.info(f"Loaded {len(matchers)} matchers from {directory}")
    return matchers


def match_terms(
    documents: Sequence[PolicyDocument], matchers: Sequence[Matcher]
) -> Dict[str, Dict[Interval, float]]:
    """Share of each interval's documents matched by each matcher.

    Intervals without documents do not appear.
    """
    totals: Dict[Interval, int] = {}
    hits: Dict[str, Dict[Interval, int]] = {m.name: {} for m in matchers}
    for document in documents:
        totals[document.interval] = totals.get(document.interval, 0) + 1
        text = visible_text(document.markdown)
        hrefs = [link.href for link in outbound_links(document.markdown)]
        for matcher in matchers:
            if matcher.matches_text(text) or matcher.matches_links(hrefs):
                counts = hits[matcher.name]
                counts[document.interval] = counts.get(document.interval, 0) + 1
    return {
        matcher.name: {
            interval: hits[matcher.name].get(interval, 0) / total for interval, total in sorted(totals.items())
        }
        for matcher in matchers
    }


def overall_share(fractions: Dict[Interval, float]) -> float:
    return max(fractions.values()) if fractions else 0.0


class SnippetLabel(BaseModel):
    matcher: str
    label: bool
    text: str


class MatcherValidation(BaseModel):
    matcher: str
    positives: int
    negatives: int
    agreement: float


def validate_matchers(matchers: Sequence[Matcher], snippets: Sequence[SnippetLabel]) -> List[MatcherValidation]:
    """Agreement of each matcher with hand labels on short snippets."""
    by_name = {m.name: m for m in matchers}
    grouped: Dict[str, List[SnippetLabel]] = {}
    for snippet in snippets:
        if snippet.matcher not in by_name:
            logger.warning(f"Snippet refers to unknown matcher {snippet.matcher!r}")
            continue
        grouped.setdefault(snippet.matcher, []).append(snippet)
    rows = []
    for name in sorted(grouped):
        matcher = by_name[name]
        agree = sum(1 for s in grouped[name] if matcher.matches(s.text) == s.label)
        rows.append(
            MatcherValidation(
                matcher=name,
                positives=sum(1 for s in grouped[name] if s.label),
                negatives=sum(1 for s in grouped[name] if not s.label),
                agreement=agree / len(grouped[name]),
            )
        )
    return rows
