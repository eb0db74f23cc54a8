import re
from pathlib import Path
from typing import FrozenSet, Iterable, List, Union

from app.core.extraction import visible_text
from app.core.models import PolicyDocument

_SYMBOLS = re.compile(r"[^\w\s]|_", re.UNICODE)


def load_stopwords(path: Path) -> FrozenSet[str]:
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip().lower()
        if line and not line.startswith("#"):
            words.add(line)
    return frozenset(words)


def tokenize(text: str) -> List[str]:
    return _SYMBOLS.sub(" ", text.lower()).split()


def preprocess(document: Union[PolicyDocument, str], stopwords: Iterable[str] = frozenset()) -> List[str]:
    """Markdown markup removed, lowercased, symbols stripped, stop words dropped."""
    markdown = document.markdown if isinstance(document, PolicyDocument) else document
    stop = stopwords if isinstance(stopwords, (set, frozenset)) else frozenset(stopwords)
    return [token for token in tokenize(visible_text(markdown)) if token not in stop]


def ngrams(tokens: List[str], n: int) -> List[str]:
    return [" ".join(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


def url_tokens(url: str) -> List[str]:
    return [token for token in re.split(r"[^a-z0-9]+", url.lower()) if token and token not in ("http", "https", "www")]
