class PolicyArchiveError(Exception):
    """Base class for all errors raised by the pipeline."""


class IntervalRangeError(PolicyArchiveError, ValueError):
    pass


class ConfigurationError(PolicyArchiveError):
    pass


class ArchiveError(PolicyArchiveError):
    pass


class FetchError(ArchiveError):
    pass


class LiveWebEscapeError(FetchError):
    """The archive tried to send us to a host other than itself."""


class NotArchivedError(ArchiveError):
    pass


class RateLimitedError(ArchiveError):
    def __init__(self, status: int, message: str = ""):
        super().__init__(message or f"Archive answered HTTP {status}")
        self.status = status


class OutOfIntervalRedirectError(ArchiveError):
    def __init__(self, timestamp: str, interval: str):
        super().__init__(f"Redirected to snapshot {timestamp} outside {interval}")
        self.timestamp = timestamp
        self.interval = interval


class TrainingError(PolicyArchiveError):
    pass


class ModelNotFoundError(TrainingError, FileNotFoundError):
    pass


class UndefinedReadabilityError(PolicyArchiveError, ValueError):
    pass


class ChangePointError(PolicyArchiveError, ValueError):
    pass


class StageError(PolicyArchiveError):
    pass


class MissingPrerequisiteError(StageError):
    def __init__(self, stage: str, missing: str, manifest_path: str):
        super().__init__(
            f"Stage '{stage}' requires stage '{missing}' to run first "
            f"(manifest not found: {manifest_path})"
        )
        self.stage = stage
        self.missing = missing


class ManifestMismatchError(StageError):
    pass
