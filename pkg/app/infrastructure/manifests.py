"""Per-stage run manifests: what went in, what came out, what it was built on."""

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Sequence

from pydantic import BaseModel, Field

from app.core.errors import ManifestMismatchError, MissingPrerequisiteError
from app.infrastructure.storage import write_atomic

logger = logging.getLogger(__name__)


class Manifest(BaseModel):
    stage: str
    inputs_digest: str
    config_digest: str
    outputs_digest: str
    upstream: Dict[str, str] = Field(default_factory=dict)
    counts: Dict[str, Any] = Field(default_factory=dict)
    metrics: Dict[str, Any] = Field(default_factory=dict)


def _relative_name(path: Path, roots: Sequence[Path]) -> str:
    for root in roots:
        try:
            return path.relative_to(root).as_posix()
        except ValueError:
            continue
    return path.name


def files_digest(paths: Iterable[Path], roots: Sequence[Path]) -> str:
    """Digest over (root-relative path, content) of every existing file, in path order."""
    digest = hashlib.sha256()
    roots = [Path(root) for root in roots]
    for path in sorted(Path(p) for p in paths):
        if not path.is_file():
            continue
        name = _relative_name(path, roots)
        digest.update(name.encode("utf-8") + b"\0")
        digest.update(hashlib.sha256(path.read_bytes()).digest())
    return digest.hexdigest()


def text_digest(*parts: str) -> str:
    digest = hashlib.sha256()
    for part in parts:
        digest.update(part.encode("utf-8") + b"\0")
    return digest.hexdigest()


class ManifestStore:
    def __init__(self, corpus_root: Path):
        self.directory = Path(corpus_root) / "manifests"

    def path(self, stage: str) -> Path:
        return self.directory / f"{stage}.json"

    def read(self, stage: str) -> Optional[Manifest]:
        path = self.path(stage)
        if not path.exists():
            return None
        return Manifest.model_validate_json(path.read_text(encoding="utf-8"))

    def write(self, manifest: Manifest) -> Path:
        path = self.path(manifest.stage)
        data = json.dumps(manifest.model_dump(mode="json"), sort_keys=True, indent=1) + "\n"
        write_atomic(path, data.encode("utf-8"))
        logger.info(f"Stage {manifest.stage}: manifest written to {path}")
        return path

    def require(self, stage: str, prerequisite: str) -> Manifest:
        manifest = self.read(prerequisite)
        if manifest is None:
            raise MissingPrerequisiteError(stage, prerequisite, str(self.path(prerequisite)))
        return manifest

    def upstream_digests(self, stage: str, prerequisites: Iterable[str]) -> Dict[str, str]:
        return {name: self.require(stage, name).outputs_digest for name in prerequisites}

    def verify_chain(self, stages: Iterable[str]) -> None:
        """Every manifest's recorded upstream digests must match the upstream's current outputs."""
        for stage in stages:
            manifest = self.read(stage)
            if manifest is None:
                continue
            for upstream, recorded in sorted(manifest.upstream.items()):
                current = self.read(upstream)
                if current is None:
                    raise MissingPrerequisiteError(stage, upstream, str(self.path(upstream)))
                if current.outputs_digest != recorded:
                    raise ManifestMismatchError(
                        f"Stage '{stage}' was built on different '{upstream}' outputs; re-run '{stage}'"
                    )
