"""Injectable time source.

Every timed behavior (expiry, refresh intervals, KT regeneration) consults a
Clock instance instead of the wall clock, so tests can compress days into
milliseconds.
"""

from __future__ import annotations

import threading
import time


class Clock:
    """Interface: now() in seconds since epoch, sleep(dt) cooperative wait."""

    def now(self) -> float:
        raise NotImplementedError

    def sleep(self, seconds: float) -> None:
        raise NotImplementedError


class SystemClock(Clock):
    def now(self) -> float:
        return time.time()

    def sleep(self, seconds: float) -> None:
        time.sleep(max(0.0, seconds))


class ManualClock(Clock):
    """A clock that only moves when the test advances it.

    sleep() blocks until simulated time passes the deadline (or the clock is
    closed), so scheduler loops driven by this clock stay fully deterministic.
    """

    def __init__(self, start: float = 1_000_000.0):
        self._now = start
        self._cond = threading.Condition()
        self._closed = False

    def now(self) -> float:
        with self._cond:
            return self._now

    def sleep(self, seconds: float) -> None:
        with self._cond:
            deadline = self._now + max(0.0, seconds)
            while self._now < deadline and not self._closed:
                self._cond.wait(timeout=1.0)

    def advance(self, seconds: float) -> None:
        with self._cond:
            self._now += seconds
            self._cond.notify_all()

    def set(self, timestamp: float) -> None:
        with self._cond:
            self._now = max(self._now, timestamp)
            self._cond.notify_all()

    def close(self) -> None:
        """Release all sleepers; used at scheduler shutdown."""
        with self._cond:
            self._closed = True
            self._cond.notify_all()
