"""HTML to policy text: boilerplate removal, markdown, link detection."""

import logging
import re
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Union
from urllib.parse import urljoin, urlparse

import html2text
import markdown as markdown_lib
from bs4 import BeautifulSoup, Tag

from app.core.models import CandidateLink

logger = logging.getLogger(__name__)

BLANK_THRESHOLD = 50

DROP_TAGS = ("script", "style", "noscript", "template", "head", "iframe", "frame", "frameset", "svg")
BOILERPLATE_TAGS = ("nav", "footer", "header", "aside")
BLOCK_TAGS = ("body", "div", "article", "main", "section", "td", "table", "tbody", "tr", "center", "font", "span", "form")
POSITIVE_HINTS = re.compile(r"article|main|content|policy|privacy|post|entry|text|body|legal", re.I)
NEGATIVE_HINTS = re.compile(
    r"nav|menu|breadcrumb|footer|header|masthead|sidebar|side-bar|aside|related|promo|sponsor|"
    r"subscribe|newsletter|social|share|signin|login|advert|\bads?\b|banner|widget|search|comment",
    re.I,
)
SEMANTIC_CONTENT_TAGS = ("article", "main")
HINT_BONUS = 1.25
DESCEND_SHARE = 0.8
# html2text indents every list level, the outermost included, by two spaces
LIST_INDENT = "  "
LIST_ITEM = re.compile(r"^  \s*(?:[-*+]|\d+\.) ")


@dataclass
class ContentBlock:
    node: Tag
    text_length: int
    low_content: bool = False


@dataclass(frozen=True)
class LinkPattern:
    id: str
    kind: str  # all | contains | exact
    terms: tuple

    def matches(self, text: str) -> bool:
        if self.kind == "all":
            return all(term in text for term in self.terms)
        if self.kind == "contains":
            return self.terms[0] in text
        return text == self.terms[0]


DEFAULT_LINK_PATTERNS = (
    LinkPattern("privacy+policy", "all", ("privacy", "policy")),
    LinkPattern("privacy-notice", "contains", ("privacy notice",)),
    LinkPattern("privacy-statement", "contains", ("privacy statement",)),
    LinkPattern("data-protection", "contains", ("data protection",)),
    LinkPattern("data-policy", "contains", ("data policy",)),
    LinkPattern("privacy", "exact", ("privacy",)),
    LinkPattern("privacy-practices", "contains", ("privacy practices",)),
)


def parse_link_patterns(lines: Iterable[str]) -> List[LinkPattern]:
    """Read `all:<w1>,<w2>` / `contains:<phrase>` / `exact:<phrase>` lines."""
    patterns = []
    for number, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        kind, _, body = line.partition(":")
        kind = kind.strip().lower()
        body = normalize_link_text(body)
        if kind not in ("all", "contains", "exact") or not body:
            logger.warning(f"Skipping malformed link pattern on line {number}: {raw!r}")
            continue
        terms = tuple(t.strip() for t in body.split(",") if t.strip()) if kind == "all" else (body,)
        pattern_id = "+".join(terms) if kind == "all" else body.replace(" ", "-")
        patterns.append(LinkPattern(pattern_id, kind, terms))
    return patterns


def normalize_link_text(text: str) -> str:
    return " ".join(text.lower().split())


def match_link_pattern(text: str, patterns: Sequence[LinkPattern] = DEFAULT_LINK_PATTERNS) -> Optional[LinkPattern]:
    normalized = normalize_link_text(text)
    for pattern in patterns:
        if pattern.matches(normalized):
            return pattern
    return None


def parse_html(html: Union[bytes, str]) -> BeautifulSoup:
    return BeautifulSoup(html, "html.parser")


def extract_title(html: Union[bytes, str]) -> str:
    soup = parse_html(html)
    if soup.title is None:
        return ""
    return " ".join(soup.title.get_text(" ").split())


def _hint_text(node: Tag) -> str:
    classes = node.get("class") or []
    if isinstance(classes, str):
        classes = [classes]
    return " ".join(classes) + " " + (node.get("id") or "")


def _is_boilerplate(node: Tag) -> bool:
    if node.name in BOILERPLATE_TAGS:
        return True
    if node.name in ("body", "html") + SEMANTIC_CONTENT_TAGS:
        return False
    hints = _hint_text(node)
    return bool(NEGATIVE_HINTS.search(hints)) and not POSITIVE_HINTS.search(hints)


def _has_positive_hint(node: Tag) -> bool:
    return node.name in SEMANTIC_CONTENT_TAGS or bool(POSITIVE_HINTS.search(_hint_text(node)))


def _text_len(node: Tag) -> int:
    return len(" ".join(node.get_text(" ").split()))


def _link_len(node: Tag) -> int:
    return sum(_text_len(a) for a in node.find_all("a"))


def _score(node: Tag) -> float:
    length = _text_len(node)
    if length == 0:
        return 0.0
    density = min(1.0, _link_len(node) / length)
    score = length * (1.0 - density)
    if _has_positive_hint(node):
        score *= HINT_BONUS
    return score


def extract_main_content(html: Union[bytes, str]) -> ContentBlock:
    """Pick the subtree holding the page's main text.

    Chrome (nav/header/footer/aside and elements whose class or id look
    like chrome) is pruned first. Starting at <body>, we descend into a
    child block while it carries most of the parent's link-poor text; a
    semantic hint (article, main, content/policy classes) lowers the bar.
    A page left with no text after pruning returns the untouched body,
    flagged as low-content.
    """
    soup = parse_html(html)
    for node in soup.find_all(DROP_TAGS):
        node.decompose()
    body = soup.body or soup
    original = BeautifulSoup(str(body), "html.parser")
    for node in list(body.find_all(True)):
        if getattr(node, "decomposed", False):
            continue
        if _is_boilerplate(node):
            node.decompose()
    if _score(body) == 0:
        fallback = original.body or original
        return ContentBlock(node=fallback, text_length=_text_len(fallback), low_content=True)
    current = body
    while True:
        base = _score(current)
        if base <= 0:
            break
        best = None
        for child in current.find_all(BLOCK_TAGS, recursive=False):
            if _score(child) >= DESCEND_SHARE * base:
                best = child
                break
        if best is None:
            break
        current = best
    return ContentBlock(node=current, text_length=_text_len(current))


def _converter() -> html2text.HTML2Text:
    converter = html2text.HTML2Text()
    converter.body_width = 0
    converter.ignore_images = True
    converter.ignore_emphasis = True
    converter.ignore_links = False
    converter.inline_links = True
    converter.protect_links = False
    converter.unicode_snob = True
    converter.ul_item_mark = "-"
    converter.single_line_break = False
    return converter


def _dedent_lists(lines: List[str]) -> List[str]:
    """Move list items one level left so top-level items sit at column 0."""
    dedented = []
    in_list = False
    for line in lines:
        if LIST_ITEM.match(line):
            in_list = True
        elif line and not line.startswith(" "):
            in_list = False
        if in_list and line.startswith(LIST_INDENT):
            line = line[len(LIST_INDENT) :]
        dedented.append(line)
    return dedented


def to_markdown(
content: Union[ContentBlock, Tag, str]) -> str:
    if isinstance(content, ContentBlock):
        content = content.node
    if isinstance(content, Tag):
        for node in content.find_all(("script", "style")):
            node.decompose()
        content = str(content)
    text = _converter().handle(content)
    lines = _dedent_lists([line.rstrip() for line in text.splitlines()])
    text = "\n".join(lines)
    text = re.sub(r"\n{3,}", "\n\n", text)
    return text.strip() + "\n" if text.strip() else ""


def page_markdown(html: Union[bytes, str]) -> str:
    """Markdown of the whole page; frames are not followed."""
    soup = parse_html(html)
    for node in soup.find_all(DROP_TAGS):
        node.decompose()
    return to_markdown(soup.body or soup)


def render_markdown(text: str) -> BeautifulSoup:
    return BeautifulSoup(markdown_lib.markdown(text, extensions=["tables"]), "html.parser")


def visible_text(text: str) -> str:
    """Plain text a reader would see once the markdown is rendered."""
    return " ".join(render_markdown(text).get_text(" ").split())


def is_blank(text: str, threshold: int = BLANK_THRESHOLD) -> bool:
    return len(visible_text(text)) < threshold


def strip_to_sentences(text: str) -> str:
    """Keep paragraph prose only: headers, lists, tables and link targets go."""
    rendered = render_markdown(text)
    for node in rendered.find_all(["h1", "h2", "h3", "h4", "h5", "h6", "ul", "ol", "table", "pre", "hr"]):
        node.decompose()
    paragraphs = []
    for paragraph in rendered.find_all("p"):
        sentence_text = " ".join(paragraph.get_text(" ").split())
        if sentence_text:
            paragraphs.append(sentence_text)
    return "\n\n".join(paragraphs)


def find_policy_links(
    html: Union[bytes, str],
    base_url: str,
    patterns: Sequence[LinkPattern] = DEFAULT_LINK_PATTERNS,
) -> List[CandidateLink]:
    """Anchors whose text matches a policy link pattern, first pattern wins.

    Candidates come back ordered by pattern priority, then document order,
    with duplicate targets removed.
    """
    soup = parse_html(html)
    found = []
    seen = set()
    for position, anchor in enumerate(soup.find_all("a", href=True)):
        href = anchor["href"].strip()
        if not href or href.startswith(("javascript:", "mailto:", "#")):
            continue
        text = normalize_link_text(anchor.get_text(" "))
        pattern = match_link_pattern(text, patterns)
        if pattern is None:
            continue
        absolute = urljoin(base_url, href).split("#", 1)[0]
        if urlparse(absolute).scheme not in ("http", "https") or absolute in seen:
            continue
        seen.add(absolute)
        rank = next(i for i, p in enumerate(patterns) if p is pattern)
        found.append((rank, position, CandidateLink(href=absolute, link_text=text, pattern=pattern.id)))
    found.sort(key=lambda item: (item[0], item[1]))
    return [candidate for _, _, candidate in found]


def is_pdf_link(url: str) -> bool:
    return urlparse(url).path.lower().endswith(".pdf")
