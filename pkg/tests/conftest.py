import pytest

from app.adapters.archive_client import WaybackArchiveClient
from app.adapters.mock_archive import MockArchive, serve_in_thread
from app.adapters.rate_limiter import RateLimiter


@pytest.fixture
def archive():
    return MockArchive()


@pytest.fixture
def endpoint(archive):
    with serve_in_thread(archive) as url:
        yield url


@pytest.fixture
def limiter():
    return RateLimiter(max_in_flight=4, backoff_initial=0.2, backoff_cap=1.0)


@pytest.fixture
def client(endpoint, limiter):
    return WaybackArchiveClient(endpoint, limiter, timeout=5.0, max_retries=3, retry_base_delay=0.01)
