import logging
import os
import threading
from pathlib import Path
from typing import Dict, List, Optional

from app.core.classifier.training import Model, dump_model, parse_model
from app.core.errors import ModelNotFoundError, TrainingError
from app.core.interfaces import ICorpusStorage, IMetadataLog
from app.core.models import AttemptRecord, SiteRecord, SnapshotRef

logger = logging.getLogger(__name__)

POLICY_MARKDOWN = "policy.md"


def write_atomic(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as f:
        f.write(data)
    os.replace(tmp, path)


class MetadataLog(IMetadataLog):
    """Append-only JSON lines of attempt records, safe across worker threads."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def append(self, record: AttemptRecord):
        line = record.model_dump_json() + "\n"
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(line)

    def read(self) -> List[AttemptRecord]:
        if not self.path.exists():
            return []
        records = []
        with open(self.path, encoding="utf-8") as f:
            for number, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    records.append(AttemptRecord.model_validate_json(line))
                except ValueError as e:
                    logger.warning(f"Skipping bad metadata line {number} in {self.path}: {str(e)}")
        return records

    def rewrite(self, records: List[AttemptRecord]):
        """Replace the log with `records` sorted by (site, interval)."""
        ordered = sorted(records, key=lambda r: (r.site, r.interval))
        data = "".join(record.model_dump_json() + "\n" for record in ordered)
        with self._lock:
            write_atomic(self.path, data.encode("utf-8"))

    def clear(self):
        with self._lock:
            if self.path.exists():
                self.path.unlink()


class CorpusStorage(ICorpusStorage):
    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.metadata = MetadataLog(self.root / "metadata.jsonl")
        self.curated = MetadataLog(self.root / "curated.jsonl")

    def capture_path(self, domain: str, interval: str, name: str) -> Path:
        return self.root / domain / interval / name

    def save_capture(self, domain: str, interval: str, name: str, body: bytes) -> Path:
        path = self.capture_path(domain, interval, name)
        write_atomic(path, body)
        return path

    def load_capture(self, domain: str, interval: str, name: str) -> bytes:
        path = self.capture_path(domain, interval, name)
        if not path.exists():
            raise FileNotFoundError(f"Capture {name} for {domain} {interval} not found")
        return path.read_bytes()

    def has_capture(self, domain: str, interval: str, name: str) -> bool:
        return self.capture_path(domain, interval, name).exists()

    def save_policy(self, domain: str, interval: str, markdown: str) -> Path:
        path = self.capture_path(domain, interval, POLICY_MARKDOWN)
        write_atomic(path, markdown.encode("utf-8"))
        return path

    def load_policy(self, domain: str, interval: str) -> Optional[str]:
        path = self.capture_path(domain, interval, POLICY_MARKDOWN)
        if not path.exists():
            return None
        return path.read_text(encoding="utf-8")

    def save_sites(self, sites: Dict[str, SiteRecord]):
        data = "".join(sites[domain].model_dump_json() + "\n" for domain in sorted(sites))
        write_atomic(self.root / "sites.jsonl", data.encode("utf-8"))

    def load_sites(self) -> Dict[str, SiteRecord]:
        path = self.root / "sites.jsonl"
        if not path.exists():
            return {}
        sites = {}
        for line in path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                record = SiteRecord.model_validate_json(line)
                sites[record.domain] = record
        return sites

    def save_snapshots(self, domain: str, snapshots: List[SnapshotRef]):
        data = "".join(ref.model_dump_json() + "\n" for ref in sorted(snapshots, key=lambda r: (r.timestamp, r.original_url)))
        write_atomic(self.root / "snapshots" / f"{domain}.jsonl", data.encode("utf-8"))

    def load_snapshots(self, domain: str) -> List[SnapshotRef]:
        path = self.root / "snapshots" / f"{domain}.jsonl"
        if not path.exists():
            return []
        return [SnapshotRef.model_validate_json(line) for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]


class ModelStorage:
    def __init__(self, directory: Path, name: str = "policy_classifier.json"):
        self.path = Path(directory) / name

    def save(self, model: Model) -> Path:
        write_atomic(self.path, dump_model(model).encode("utf-8"))
        logger.info(f"Model saved to {self.path}")
        return self.path

    def load(self) -> Model:
        try:
            text = self.path.read_text(encoding="utf-8")
        except FileNotFoundError as e:
            raise ModelNotFoundError(f"Model file not found: {self.path}") from e
        except OSError as e:
            raise TrainingError(f"Cannot read model {self.path}: {str(e)}") from e
        return parse_model(text)
