import random
import re
from collections import Counter

import pytest

from app.core.extraction import (
    extract_main_content,
    extract_title,
    find_policy_links,
    is_blank,
    is_pdf_link,
    match_link_pattern,
    page_markdown,
    parse_link_patterns,
    render_markdown,
    strip_to_sentences,
    to_markdown,
    visible_text,
)

POLICY_TEXT = (
    "We collect information you provide when you create an account, such as your name and email address. "
    "We use this information to operate the service and to contact you about changes to it."
)

POLICY_PAGE = f"""
<html><head><title> Privacy   Policy | Example </title><script>var x = 1;</script></head>
<body>
  <header><a href="/">Home</a> <a href="/shop">Shop</a></header>
  <nav><a href="/about">About us</a> <a href="/jobs">Careers</a></nav>
  <div class="sidebar-widget"><a href="/deals">Today's deals</a></div>
  <div class="content">
    <h1>Privacy Policy</h1>
    <p>{POLICY_TEXT}</p>
    <p>We share data with <a href="http://partner.example/">our partners</a> only as described here.</p>
  </div>
  <footer>Copyright 2015 Example Inc.</footer>
</body></html>
"""


def test_main_content_drops_chrome():
    block = extract_main_content(POLICY_PAGE)
    markdown = to_markdown(block)
    assert not block.low_content
    assert "# Privacy Policy" in markdown
    assert POLICY_TEXT in markdown
    for chrome in ("About us", "Careers", "Copyright", "Today's deals", "var x"):
        assert chrome not in markdown


def test_markdown_keeps_links():
    markdown = to_markdown(extract_main_content(POLICY_PAGE))
    assert "[our partners](http://partner.example/)" in markdown


def test_frameset_page_is_blank_and_low_content():
    html = '<html><frameset cols="50%,50%"><frame src="left.html"><frame src="right.html"></frameset></html>'
    assert page_markdown(html) == ""
    assert is_blank(page_markdown(html))
    assert extract_main_content(html).low_content


def test_short_page_is_blank_long_page_is_not():
    assert is_blank("Welcome!")
    assert not is_blank(POLICY_TEXT)


def test_extract_title():
    assert extract_title(POLICY_PAGE) == "Privacy Policy | Example"
    assert extract_title("<p>no title</p>") == ""


def test_visible_text_and_sentences():
    markdown = (
        "# Our Policy\n\nFirst sentence here. Second one.\n\n- item one\n- item two\n\n"
        "Last paragraph with [a link](http://x.example/).\n"
    )
    assert visible_text("**Bold** and [link](http://x.example/)") == "Bold and link"
    stripped = strip_to_sentences(markdown)
    assert stripped.startswith("First sentence here. Second one.")
    assert "a link" in stripped
    assert "Our Policy" not in stripped
    assert "item" not in stripped
    assert "http" not in stripped


def test_find_policy_links_priority_and_dedup():
    homepage = """
    <a href="/legal/privacy.html">Privacy</a>
    <a href="/privacy-policy">Privacy Policy</a>
    <a href="notice">Our privacy notice</a>
    <a href="mailto:dpo@example.com">Privacy Policy</a>
    <a href="/privacy-policy#top">privacy   policy</a>
    <a href="/terms">Terms of Use</a>
    """
    links = find_policy_links(homepage, "http://example.com/home/")
    assert [(link.href, link.pattern) for link in links] == [
        ("http://example.com/privacy-policy", "privacy+policy"),
        ("http://example.com/home/notice", "privacy-notice"),
        ("http://example.com/legal/privacy.html", "privacy"),
    ]
    assert links[1].link_text == "our privacy notice"


def test_no_policy_link():
    assert find_policy_links('<a href="/faq">FAQ</a><a href="/privacy-tips">Privacy tips</a>', "http://x.example/") == []


def test_parse_link_patterns():
    patterns = parse_link_patterns(["# comment", "all: Privacy, Policy", "contains:Privacy Notice", "bogus", "exact:privacy"])
    assert [(p.id, p.kind, p.terms) for p in patterns] == [
        ("privacy+policy", "all", ("privacy", "policy")),
        ("privacy-notice", "contains", ("privacy notice",)),
        ("privacy", "exact", ("privacy",)),
    ]
    assert match_link_pattern("Policy on PRIVACY", patterns).id == "privacy+policy"
    assert match_link_pattern("privacy center", patterns) is None


def test_is_pdf_link():
    assert is_pdf_link("http://example.com/docs/Privacy.PDF")
    assert not is_pdf_link("http://example.com/pdf/privacy")


def test_nested_list_indentation():
    html = "<ul><li>one<ul><li>two</li></ul></li><li>three</li></ul>"
    assert to_markdown(html) == "- one\n  - two\n- three\n"


def test_lists_after_paragraph_start_at_column_zero():
    html = "<p>Intro text.</p><ol><li>first</li><li>second</li></ol><p>After.</p>"
    assert to_markdown(html) == "Intro text.\n\n1. first\n2. second\n\nAfter.\n"


WORDS = "we collect share data cookies partners account email address contact notice rights choices site".split()


def random_phrase(rng, low=2, high=8):
    return " ".join(rng.choice(WORDS) for _ in range(rng.randint(low, high)))


def random_html(rng):
    blocks = []
    previous = None
    for _ in range(rng.randint(1, 6)):
        kind = rng.choice(["h2", "p", "p", "link", "ul", "ol"])
        # back-to-back lists merge into one when the markdown is rendered
        if kind in ("ul", "ol") and previous in ("ul", "ol"):
            kind = "p"
        previous = kind
        if kind == "h2":
            blocks.append(f"<h2>{random_phrase(rng, 1, 4)}</h2>")
        elif kind == "p":
            blocks.append(f"<p>{random_phrase(rng)}. {random_phrase(rng)}.</p>")
        elif kind == "link":
            blocks.append(f'<p>{random_phrase(rng)} <a href="http://site.example/{rng.choice(WORDS)}">{random_phrase(rng, 1, 3)}</a> {random_phrase(rng)}.</p>')
        else:
            items = "".join(f"<li>{random_phrase(rng, 1, 5)}</li>" for _ in range(rng.randint(1, 4)))
            blocks.append(f"<{kind}>{items}</{kind}>")
    return "".join(blocks)


def word_counts(text):
    return Counter(re.findall(r"\w+", text))


@pytest.mark.parametrize("seed", range(100))
def test_markdown_is_stable_when_reparsed(seed):
    markdown = to_markdown(random_html(random.Random(seed)))
    assert to_markdown(render_markdown(markdown)) == markdown


@pytest.mark.parametrize("seed", range(100))
def test_sentence_stripping_only_drops_words(seed):
    markdown = to_markdown(random_html(random.Random(seed)))
    assert not word_counts(strip_to_sentences(markdown)) - word_counts(markdown)
