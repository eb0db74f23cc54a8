import hashlib
import logging
from pathlib import Path
from typing import Dict, List

import pandas as pd

from app.core.interfaces import IReportWriter

logger = logging.getLogger(__name__)


def file_sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class CsvReportWriter(IReportWriter):
    """One CSV per report under a single directory, LF line endings, no index column."""

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.written: Dict[str, int] = {}

    def path(self, name: str) -> Path:
        return self.directory / f"{name}.csv"

    def write(self, name: str, frame: pd.DataFrame) -> Path:
        path = self.path(name)
        frame.to_csv(path, index=False, lineterminator="\n")
        self.written[name] = len(frame)
        logger.info(f"Wrote report {path.name} ({len(frame)} rows)")
        return path

    def read(self, name: str) -> pd.DataFrame:
        return pd.read_csv(self.path(name), dtype=str, keep_default_na=False)

    def existing(self) -> List[str]:
        return sorted(p.stem for p in self.directory.glob("*.csv") if p.stem != "index")

    def write_index(self) -> Path:
        rows = []
        for name in self.existing():
            frame = self.read(name)
            rows.append({"report": name, "rows": len(frame), "sha256": file_sha256(self.path(name))})
        return self.write("index", pd.DataFrame(rows, columns=["report", "rows", "sha256"]))
