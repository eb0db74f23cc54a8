from datetime import datetime, timezone
from enum import Enum
from functools import total_ordering
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator


class Half(str, Enum):
    A = "A"
    B = "B"


@total_ordering
class Interval(BaseModel):
    """Half-year bucket: A is January to June, B is July to December."""

    model_config = ConfigDict(frozen=True)

    year: int
    half: Half

    def __str__(self) -> str:
        return f"{self.year}{self.half.value}"

    def __lt__(self, other: "Interval") -> bool:
        if not isinstance(other, Interval):
            return NotImplemented
        return (self.year, self.half.value) < (other.year, other.half.value)


class FailureCause(str, Enum):
    NO_POLICY_LINK = "NoPolicyLinkFound"
    BLANK_HOMEPAGE = "BlankHomepage"
    NON_ENGLISH_HOMEPAGE = "NonEnglishHomepage"
    POLICY_NOT_ARCHIVED = "PolicyNotArchivedInInterval"
    OUT_OF_INTERVAL_REDIRECT = "OutOfIntervalRedirect"
    FETCH_ERROR = "FetchError"
    NON_ENGLISH_POLICY = "NonEnglishPolicy"
    CLASSIFIED_NEGATIVE = "ClassifiedNegative"


SUCCESS = "success"
PDF_CANDIDATE = "pdf_candidate"
OUTCOMES = {SUCCESS, PDF_CANDIDATE} | {cause.value for cause in FailureCause}


def parse_timestamp(timestamp: str) -> datetime:
    if len(timestamp) != 14 or not timestamp.isdigit():
        raise ValueError(f"Not a 14-digit archive timestamp: {timestamp!r}")
    return datetime.strptime(timestamp, "%Y%m%d%H%M%S").replace(tzinfo=timezone.utc)


class SiteRecord(BaseModel):
    domain: str
    ranks: Dict[str, int] = Field(default_factory=dict)
    language: Optional[str] = None
    language_confidence: float = 0.0
    categories: List[str] = Field(default_factory=list)

    @field_validator("domain")
    @classmethod
    def _domain_not_empty(cls, value: str) -> str:
        value = value.strip().lower()
        if not value:
            raise ValueError("domain must not be empty")
        return value

    def rank_at(self, interval: Interval) -> Optional[int]:
        return self.ranks.get(str(interval))


class SnapshotRef(BaseModel):
    model_config = ConfigDict(frozen=True)

    original_url: str
    timestamp: str
    status: int
    mime: str = ""
    digest: str = ""

    @field_validator("timestamp")
    @classmethod
    def _valid_timestamp(cls, value: str) -> str:
        parse_timestamp(value)
        return value

    @field_validator("status")
    @classmethod
    def _valid_status(cls, value: int) -> int:
        if not 100 <= value <= 599:
            raise ValueError(f"HTTP status out of range: {value}")
        return value

    @property
    def captured_at(self) -> datetime:
        return parse_timestamp(self.timestamp)


class ArchivedPage(BaseModel):
    final_url: str
    final_timestamp: str
    body: bytes
    content_type: str = ""


class CandidateLink(BaseModel):
    model_config = ConfigDict(frozen=True)

    href: str
    link_text: str
    pattern: str


class PolicyDocument(BaseModel):
    site: str
    interval: Optional[Interval] = None
    homepage_snapshot: Optional[SnapshotRef] = None
    policy_url: str = ""
    policy_timestamp: str = ""
    title: str = ""
    markdown: str
    link_text: str = ""
    language: str = "en"
    classifier_score: Optional[float] = None


class AttemptRecord(BaseModel):
    """One homepage snapshot attempt as stored in the metadata log."""

    site: str
    interval: str
    outcome: str
    homepage_timestamp: str = ""
    homepage_final_url: str = ""
    policy_url: str = ""
    policy_timestamp: str = ""
    link_text: str = ""
    link_pattern: str = ""
    title: str = ""
    language: str = ""
    classifier_score: Optional[float] = None

    @field_validator("outcome")
    @classmethod
    def _known_outcome(cls, value: str) -> str:
        if value not in OUTCOMES:
            raise ValueError(f"Unknown outcome: {value}")
        return value

    @property
    def key(self) -> tuple:
        return (self.site, self.interval)


class LabeledExample(BaseModel):
    document: PolicyDocument
    label: bool
