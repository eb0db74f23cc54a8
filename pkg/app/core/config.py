import configparser
import hashlib
import json
import logging
import os
from ipaddress import ip_address
from pathlib import Path
from typing import List, Optional
from urllib.parse import urlparse

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from app.core.errors import ConfigurationError

logger = logging.getLogger(__name__)

RESOURCES_DIR = Path(__file__).resolve().parent.parent / "resources"
MAX_WORKERS = 256


def _split_list(value):
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ArchiveSettings(_Section):
    endpoint: str = "http://web.archive.org"
    workers: int = Field(8, ge=1, le=MAX_WORKERS)
    backoff_initial_secs: float = Field(60.0, gt=0)
    backoff_cap_secs: float = Field(900.0, gt=0)
    request_timeout_secs: float = Field(30.0, gt=0)
    max_retries: int = Field(3, ge=0)
    max_redirects: int = Field(5, ge=0)

    @field_validator("endpoint")
    @classmethod
    def _strip_slash(cls, value: str) -> str:
        return value.rstrip("/")


class CrawlSettings(_Section):
    rank_lists_dir: Optional[str] = None
    sites_file: Optional[str] = None
    cutoff: int = Field(100_000, ge=1)
    first_interval: str = "1996A"
    last_interval: str = "2019B"
    language_fallback_snapshots: int = Field(3, ge=0)


class ExtractionSettings(_Section):
    link_patterns_file: Optional[str] = None
    language_profiles_dir: Optional[str] = None
    blank_threshold: int = Field(50, ge=0)
    min_language_confidence: float = Field(0.5, ge=0, le=1)


class ClassifierSettings(_Section):
    labels_file: Optional[str] = None
    stopwords_file: Optional[str] = None
    folds: int = Field(10, ge=2)
    min_precision: float = Field(0.97, ge=0, le=1)
    doc_freq_floor: float = Field(0.01, ge=0, le=1)
    validation_fraction: float = Field(0.25, gt=0, lt=1)
    threshold: Optional[float] = Field(None, ge=0, le=1)
    kinds: List[str] = ["random_forest", "logistic_regression"]
    grid_trees: List[int] = [100, 300]
    grid_max_depth: List[Optional[int]] = [None, 16]
    grid_min_leaf: List[int] = [1, 5]
    grid_l2: List[float] = [0.1, 1.0, 10.0]
    include_link_features: bool = False

    @field_validator("kinds", "grid_trees", "grid_min_leaf", "grid_l2", mode="before")
    @classmethod
    def _lists(cls, value):
        return _split_list(value)

    @field_validator("grid_max_depth", mode="before")
    @classmethod
    def _depths(cls, value):
        items = _split_list(value)
        return [None if str(item).lower() == "none" else item for item in items]


class CurationSettings(_Section):
    parking_file: Optional[str] = None
    public_suffix_file: Optional[str] = None


class AnalysisSettings(_Section):
    matchers_dir: Optional[str] = None
    gdpr_phrases_file: Optional[str] = None
    categories_file: Optional[str] = None
    matcher_snippets_file: Optional[str] = None
    similarity_threshold: int = Field(95, ge=0, le=100)
    changepoint_penalty: Optional[float] = Field(None, gt=0)
    changepoint_min_doc_freq: float = Field(0.01, ge=0, le=1)
    changepoint_ngram_sizes: List[int] = [1, 8]
    trend_ngram_sizes: List[int] = [1, 2, 3, 4]
    trend_min_doc_freq: float = Field(0.01, ge=0, le=1)
    trend_top_k: int = Field(20, ge=1)
    gdpr_baseline_interval: str = "2015A"
    gdpr_target_interval: str = "2018A"
    gdpr_max_baseline_freq: float = Field(0.01, ge=0, le=1)
    matcher_min_share: float = Field(0.0, ge=0, le=1)

    @field_validator("changepoint_ngram_sizes", "trend_ngram_sizes", mode="before")
    @classmethod
    def _lists(cls, value):
        return _split_list(value)


class PathSettings(_Section):
    corpus: str = "corpus"
    reports: str = "reports"
    models: str = "models"


class GeneralSettings(_Section):
    seed: int = 0


class Settings(_Section):
    general: GeneralSettings = Field(default_factory=GeneralSettings)
    archive: ArchiveSettings = Field(default_factory=ArchiveSettings)
    crawl: CrawlSettings = Field(default_factory=CrawlSettings)
    extraction: ExtractionSettings = Field(default_factory=ExtractionSettings)
    classifier: ClassifierSettings = Field(default_factory=ClassifierSettings)
    curation: CurationSettings = Field(default_factory=CurationSettings)
    analysis: AnalysisSettings = Field(default_factory=AnalysisSettings)
    paths: PathSettings = Field(default_factory=PathSettings)

    @property
    def seed(self) -> int:
        return self.general.seed

    def digest(self) -> str:
        payload = json.dumps(self.model_dump(mode="json"), sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def resource(self, configured: Optional[str], default_name: str) -> Path:
        """Path of a data file: the configured override or the bundled default."""
        if configured:
            return Path(configured)
        return RESOURCES_DIR / default_name


def _env_overrides(raw: dict) -> None:
    endpoint = os.getenv("POLICY_ARCHIVE_ENDPOINT")
    if endpoint:
        raw.setdefault("archive", {})["endpoint"] = endpoint
    workers = os.getenv("POLICY_ARCHIVE_WORKERS")
    if workers:
        raw.setdefault("archive", {})["workers"] = workers
    corpus = os.getenv("POLICY_ARCHIVE_CORPUS")
    if corpus:
        raw.setdefault("paths", {})["corpus"] = corpus


def load_settings(path: Optional[str] = None, seed: Optional[int] = None, corpus: Optional[str] = None) -> Settings:
    raw: dict = {}
    if path:
        parser = configparser.ConfigParser(interpolation=None)
        if not parser.read(path, encoding="utf-8"):
            raise ConfigurationError(f"Config file not found: {path}")
        for section in parser.sections():
            raw[section] = dict(parser.items(section))
        logger.info(f"Loaded config from {path}")
    _env_overrides(raw)
    if seed is not None:
        raw.setdefault("general", {})["seed"] = seed
    if corpus:
        raw.setdefault("paths", {})["corpus"] = corpus
    try:
        return Settings.model_validate(raw)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid configuration: {e}") from e


def require_local_endpoint(settings: Settings, live: bool) -> None:
    """Refuse non-loopback archive endpoints unless the run is explicitly live."""
    if live:
        return
    host = urlparse(settings.archive.endpoint).hostname or ""
    if host == "localhost":
        return
    try:
        if ip_address(host).is_loopback:
            return
    except ValueError:
        pass
    raise ConfigurationError(
        f"Archive endpoint {settings.archive.endpoint} is not local; pass --live to crawl it"
    )
