"""In-process insecure channel between a client and a frame endpoint."""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass
from typing import Callable, Iterator

from ..codec import ManualClock


@dataclass(frozen=True)
class Capture:
    direction: str  # "c2s" or "s2c"
    raw: bytes
    at: int
    injected: bool = False


class Tap:
    """Passive recorder attached to a channel. Safe to read while traffic flows."""

    def __init__(self):
        self._lock = threading.Lock()
        self._captures: list[Capture] = []

    def __call__(self, cap: Capture) -> None:
        with self._lock:
            self._captures.append(cap)

    def __iter__(self) -> Iterator[Capture]:
        with self._lock:
            return iter(list(self._captures))

    def __len__(self) -> int:
        with self._lock:
            return len(self._captures)


class ChannelSim:
    """Request/response channel with latency, taps and an injection path.

    ``endpoint`` is the server side (frame in, frame out). Latency is applied
    by advancing a :class:`ManualClock`, one hop each way.
    """

    def __init__(self, endpoint: Callable[[bytes], bytes], clock: ManualClock | None = None,
                 delay: int = 0, jitter: int = 0, rng: random.Random | None = None):
        if (delay or jitter) and clock is None:
            raise ValueError("latency needs a ManualClock to advance")
        self.endpoint = endpoint
        self.clock = clock
        self.delay = delay
        self.jitter = jitter
        self.rng = rng or random.Random(0)
        self._taps: list[Callable[[Capture], None]] = []
        self._lock = threading.Lock()

    def attach_tap(self, hook: Callable[[Capture], None]) -> None:
        with self._lock:
            self._taps.append(hook)

    def detach_tap(self, hook) -> None:
        with self._lock:
            self._taps.remove(hook)

    def _hop(self) -> None:
        if self.clock is not None and (self.delay or self.jitter):
            extra = self.rng.randint(0, self.jitter) if self.jitter else 0
            self.clock.advance(self.delay + extra)

    def _emit(self, cap: Capture) -> None:
        with self._lock:
            taps = list(self._taps)
        for hook in taps:
            hook(cap)

    def _now(self) -> int:
        return self.clock.now() if self.clock is not None else 0

    def _transit(self, frame: bytes, injected: bool) -> bytes:
        frame = bytes(frame)
        self._emit(Capture("c2s", frame, self._now(), injected))
        self._hop()
        reply = self.endpoint(frame)
        self._emit(Capture("s2c", reply, self._now(), injected))
        self._hop()
        return reply

    def send(self, frame: bytes) -> bytes:
        return self._transit(frame, injected=False)

    def inject(self, frame: bytes) -> bytes:
        """Deliver attacker-built bytes to the endpoint unmodified."""
        return self._transit(frame, injected=True)
