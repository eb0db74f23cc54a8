"""Politeness control shared by every crawl worker."""

import logging
import threading
import time
from contextlib import contextmanager
from typing import Callable, List, Tuple

logger = logging.getLogger(__name__)


class RateLimiter:
    """Bounded concurrency plus a global pause after throttling responses.

    At most ``max_in_flight`` requests hold a slot at once. When the archive
    answers 429 or 503, every worker stops starting new requests until the
    pause window has elapsed. The window starts at ``backoff_initial`` seconds
    and doubles for each consecutive throttling episode, capped at
    ``backoff_cap``. A success resets the doubling.
    """

    def __init__(
        self,
        max_in_flight: int = 8,
        backoff_initial: float = 60.0,
        backoff_cap: float = 900.0,
        clock: Callable[[], float] = time.monotonic,
    ):
        if max_in_flight < 1:
            raise ValueError("max_in_flight must be at least 1")
        self.max_in_flight = max_in_flight
        self.backoff_initial = backoff_initial
        self.backoff_cap = backoff_cap
        self._clock = clock
        self._slots = threading.BoundedSemaphore(max_in_flight)
        self._cond = threading.Condition()
        self._pause_until = 0.0
        self._pause_started = float("-inf")
        self._consecutive = 0
        self.in_flight = 0
        self.peak_in_flight = 0
        self.requests_started = 0
        self.throttled_responses = 0
        self.paused_seconds = 0.0
        self.starts: List[float] = []
        self.pauses: List[Tuple[float, float]] = []

    def acquire(self) -> float:
        """Block until a slot is free and no pause is active; return the start time."""
        self._slots.acquire()
        with self._cond:
            while True:
                now = self._clock()
                remaining = self._pause_until - now
                if remaining <= 0:
                    break
                self._cond.wait(timeout=remaining)
            self.in_flight += 1
            self.peak_in_flight = max(self.peak_in_flight, self.in_flight)
            self.requests_started += 1
            self.starts.append(now)
            return now

    def release(self) -> None:
        with self._cond:
            self.in_flight -= 1
        self._slots.release()

    @contextmanager
    def slot(self):
        started_at = self.acquire()
        try:
            yield started_at
        finally:
            self.release()

    def record_throttle(self, started_at: float, status: int) -> float:
        """Register a 429/503 answer and return the active pause length.

        Answers to requests that were already in flight when the current
        pause began belong to the same episode and do not double the window.
        """
        with self._cond:
            self.throttled_responses += 1
            now = self._clock()
            if started_at < self._pause_started:
                return max(0.0, self._pause_until - now)
            self._consecutive += 1
            delay = min(self.backoff_initial * 2 ** (self._consecutive - 1), self.backoff_cap)
            self._pause_started = now
            self._pause_until = max(self._pause_until, now + delay)
            self.paused_seconds += delay
            self.pauses.append((now, self._pause_until))
            logger.warning(f"Archive answered HTTP {status}; pausing all workers for {delay:.1f}s")
            self._cond.notify_all()
            return delay

    def record_success(self) -> None:
        with self._cond:
            self._consecutive = 0

    def metrics(self) -> dict:
        return {
            "requests_started": self.requests_started,
            "throttled_responses": self.throttled_responses,
            "paused_seconds": round(self.paused_seconds, 3),
            "peak_in_flight": self.peak_in_flight,
        }
