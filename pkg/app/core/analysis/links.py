from collections import defaultdict
from typing import Dict, List, NamedTuple, Sequence, Tuple
from urllib.parse import urlsplit

from app.core.curation import PublicSuffixes, normalize_policy_url
from app.core.extraction import DEFAULT_LINK_PATTERNS, LinkPattern, match_link_pattern, render_markdown
from app.core.models import PolicyDocument

POLICY_PATH_KEYWORDS = ("privacy", "policy", "policies")


class Link(NamedTuple):
    href: str
    text: str


def outbound_links(markdown: str) -> List[Link]:
    """Absolute http(s) links of a markdown document, in document order."""
    links = []
    for anchor in render_markdown(markdown).find_all("a", href=True):
        href = anchor["href"].strip()
        if urlsplit(href).scheme in ("http", "https"):
            links.append(Link(href=href, text=" ".join(anchor.get_text(" ").split())))
    return links


def is_policy_link(link: Link, patterns: Sequence[LinkPattern] = DEFAULT_LINK_PATTERNS) -> bool:
    if match_link_pattern(link.text, patterns) is not None:
        return True
    path = urlsplit(link.href).path.lower()
    return any(keyword in path for keyword in POLICY_PATH_KEYWORDS)


def link_target_key(href: str) -> str:
    key = normalize_policy_url(href)
    return key[4:] if key.startswith("www.") else key


def outbound_policy_links(
    documents: Sequence[PolicyDocument],
    suffixes: PublicSuffixes,
    patterns: Sequence[LinkPattern] = DEFAULT_LINK_PATTERNS,
) -> Tuple[Dict[str, bool], List[Tuple[str, int]]]:
    """Which sites' policies link to another organisation's policy, and the most linked targets.

    Targets are ranked by the number of distinct linking sites; links to the
    site's own registrable domain are ignored.
    """
    flags: Dict[str, bool] = {}
    linking_sites = defaultdict(set)
    for document in documents:
        site_domain, _ = suffixes.registrable_domain(document.site)
        flags.setdefault(document.site, False)
        for link in outbound_links(document.markdown):
            if not is_policy_link(link, patterns):
                continue
            target_domain, _ = suffixes.registrable_domain(link.href)
            if target_domain == site_domain:
                continue
            flags[document.site] = True
            linking_sites[link_target_key(link.href)].add(document.site)
    ranking = sorted(((url, len(sites)) for url, sites in linking_sites.items()), key=lambda row: (-row[1], row[0]))
    return dict(sorted(flags.items())), ranking
