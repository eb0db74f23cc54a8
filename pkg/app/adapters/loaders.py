"""Readers for the config-data files that feed the pipeline."""

import logging
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import pandas as pd

from app.core.analysis.matchers import SnippetLabel
from app.core.errors import ConfigurationError, IntervalRangeError
from app.core.extraction import LinkPattern, parse_link_patterns
from app.core.intervals import parse_interval
from app.core.models import Interval, LabeledExample, PolicyDocument

logger = logging.getLogger(__name__)


def read_lines(path: Path) -> List[str]:
    """Non-empty lines that are not `#` comments, stripped."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"Cannot read {path}: {str(e)}") from e
    return [line.strip() for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]


def _read_csv(path: Path, columns: Sequence[str]) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ConfigurationError(f"Cannot read {path}: {str(e)}") from e
    missing = [column for column in columns if column not in frame.columns]
    if missing:
        raise ConfigurationError(f"{path} lacks column(s): {', '.join(missing)}")
    return frame


RANK_COLUMNS = ["rank", "domain"]


def _read_rank_csv(path: Path) -> pd.DataFrame:
    try:
        frame = pd.read_csv(
            path,
            header=None,
            names=RANK_COLUMNS,
            usecols=[0, 1],
            dtype=str,
            keep_default_na=False,
            skipinitialspace=True,
        )
    except (OSError, ValueError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ConfigurationError(f"Cannot read {path}: {str(e)}") from e
    if len(frame) and [str(value).strip().lower() for value in frame.iloc[0]] == RANK_COLUMNS:
        frame = frame.iloc[1:].copy()
    return frame


def load_rank_lists(directory: Path) -> List[Tuple[Interval, List[str]]]:
    """Per-interval popularity lists from `<interval>.csv` files.

    Rows are `rank,domain`; a leading `rank,domain` header row is optional.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise ConfigurationError(f"Rank list directory not found: {directory}")
    lists = []
    for path in sorted(directory.glob("*.csv")):
        try:
            interval = parse_interval(path.stem)
        except IntervalRangeError:
            logger.warning(f"Skipping rank list with a non-interval name: {path.name}")
            continue
        frame = _read_rank_csv(path)
        frame["rank"] = pd.to_numeric(frame["rank"], errors="coerce")
        frame["domain"] = frame["domain"].str.strip().str.lower()
        bad = frame["rank"].isna() | (frame["domain"] == "")
        if bad.any():
            logger.warning(f"Skipping {int(bad.sum())} malformed rows in {path.name}")
        frame = frame[~bad].sort_values(["rank", "domain"], kind="mergesort")
        frame = frame.drop_duplicates("domain", keep="first")
        lists.append((interval, frame["domain"].tolist()))
    lists.sort(key=lambda item: item[0])
    logger.info(f"Loaded {len(lists)} rank lists from {directory}")
    return lists


def load_site_list(path: Path) -> List[str]:
    return sorted({line.lower() for line in read_lines(path)})


def load_link_patterns(path: Path) -> List[LinkPattern]:
    patterns = parse_link_patterns(read_lines(path))
    if not patterns:
        raise ConfigurationError(f"No usable link patterns in {path}")
    return patterns


def load_labeled_examples(path: Path) -> List[LabeledExample]:
    """Hand-labeled documents from a CSV of `path,label[,title]`.

    Paths are markdown files relative to the CSV's directory; labels are
    0 or 1.
    """
    path = Path(path)
    frame = _read_csv(path, ["path", "label"])
    examples = []
    for row in frame.itertuples(index=False):
        label = str(row.label).strip()
        if label not in ("0", "1"):
            logger.warning(f"Skipping example {row.path!r} with label {label!r}")
            continue
        document_path = path.parent / row.path
        try:
            markdown = document_path.read_text(encoding="utf-8")
        except OSError as e:
            logger.warning(f"Skipping unreadable example {document_path}: {str(e)}")
            continue
        title = getattr(row, "title", "") or ""
        document = PolicyDocument(site=Path(row.path).stem, markdown=markdown, title=title)
        examples.append(LabeledExample(document=document, label=label == "1"))
    logger.info(f"Loaded {len(examples)} labeled examples from {path}")
    return examples


def load_categories(path: Path) -> Dict[str, List[str]]:
    frame = _read_csv(path, ["domain", "category"])
    categories: Dict[str, List[str]] = {}
    for row in frame.itertuples(index=False):
        domain, category = row.domain.strip().lower(), row.category.strip()
        if domain and category and category not in categories.setdefault(domain, []):
            categories[domain].append(category)
    return categories


def load_snippets(path: Path) -> List[SnippetLabel]:
    frame = _read_csv(path, ["matcher", "label", "text"])
    snippets = []
    for row in frame.itertuples(index=False):
        label = str(row.label).strip()
        if label not in ("0", "1"):
            logger.warning(f"Skipping snippet for {row.matcher!r} with label {label!r}")
            continue
        snippets.append(SnippetLabel(matcher=row.matcher.strip(), label=label == "1", text=row.text))
    return snippets
