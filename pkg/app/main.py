import argparse
import logging
import sys
from typing import List, Optional

from app import __version__
from app.adapters.archive_client import WaybackArchiveClient
from app.adapters.rate_limiter import RateLimiter
from app.core.config import Settings, load_settings, require_local_endpoint
from app.core.errors import PolicyArchiveError
from app.core.services import SERVICES, STAGES, PipelineContext
from app.infrastructure.manifests import Manifest

logger = logging.getLogger(__name__)

ARCHIVE_STAGES = ("discover", "fetch")


def build_context(settings: Settings, stage: str, live: bool = False) -> PipelineContext:
    if stage not in ARCHIVE_STAGES:
        return PipelineContext(settings)
    require_local_endpoint(settings, live)
    archive = settings.archive
    limiter = RateLimiter(
        max_in_flight=archive.workers,
        backoff_initial=archive.backoff_initial_secs,
        backoff_cap=archive.backoff_cap_secs,
    )
    client = WaybackArchiveClient(
        archive.endpoint,
        limiter,
        timeout=archive.request_timeout_secs,
        max_retries=archive.max_retries,
        max_redirects=archive.max_redirects,
    )
    return PipelineContext(settings, archive=client, limiter=limiter)


def run_stage(stage: str, settings: Settings, live: bool = False, context: Optional[PipelineContext] = None) -> Manifest:
    if stage not in SERVICES:
        raise ValueError(f"Unknown stage: {stage}")
    context = context or build_context(settings, stage, live)
    return SERVICES[stage](context).run()


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="policy-archive",
        description="Crawl, extract, classify, curate and analyze archived privacy policies",
    )
    parser.add_argument("stage", choices=STAGES)
    parser.add_argument("--config", help="INI config file")
    parser.add_argument("--live", action="store_true", help="allow a non-local archive endpoint")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--corpus", default=None, help="corpus directory")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser.parse_args(argv)


def main(argv: Optional[List[str]] = None) -> int:
    args = parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    try:
        settings = load_settings(args.config, seed=args.seed, corpus=args.corpus)
        run_stage(args.stage, settings, live=args.live)
    except PolicyArchiveError as e:
        logger.error(f"Stage {args.stage} failed: {str(e)}")
        print(f"error: {str(e)}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
