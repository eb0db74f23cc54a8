from abc import ABC, abstractmethod
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import pandas as pd

from app.core.models import ArchivedPage, AttemptRecord, Interval, SiteRecord, SnapshotRef


class IArchiveClient(ABC):
    @abstractmethod
    def list_snapshots(self, url: str) -> List[SnapshotRef]:
        pass

    @abstractmethod
    def fetch_snapshot(self, ref: SnapshotRef, interval: Interval) -> ArchivedPage:
        pass


class ILanguageDetector(ABC):
    @abstractmethod
    def detect(self, text: str) -> Tuple[str, float]:
        pass


class IMetadataLog(ABC):
    @abstractmethod
    def append(self, record: AttemptRecord):
        pass

    @abstractmethod
    def read(self) -> List[AttemptRecord]:
        pass

    @abstractmethod
    def rewrite(self, records: List[AttemptRecord]):
        pass


class ICorpusStorage(ABC):
    @abstractmethod
    def save_capture(self, domain: str, interval: str, name: str, body: bytes) -> Path:
        pass

    @abstractmethod
    def load_capture(self, domain: str, interval: str, name: str) -> bytes:
        pass

    @abstractmethod
    def save_policy(self, domain: str, interval: str, markdown: str) -> Path:
        pass

    @abstractmethod
    def load_policy(self, domain: str, interval: str) -> Optional[str]:
        pass

    @abstractmethod
    def save_sites(self, sites: Dict[str, SiteRecord]):
        pass

    @abstractmethod
    def load_sites(self) -> Dict[str, SiteRecord]:
        pass


class IReportWriter(ABC):
    @abstractmethod
    def write(self, name: str, frame: pd.DataFrame) -> Path:
        pass
