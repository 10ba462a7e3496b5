"""Byte encodings, fixed-width XOR, the one-way function ``f`` and clocks."""

from __future__ import annotations

import hashlib
import threading
import time
from dataclasses import dataclass, field
from typing import Protocol

TIMESTAMP_WIDTH = 8
DEFAULT_DELTA_T = 60
DEFAULT_SKEW = 5


class EncodingOverflow(ValueError):
    pass


@dataclass(frozen=True)
class OneWayConfig:
    """How ``f`` is realised.

    ``hash`` reduces a digest into ``[1, n-1]``. ``toy`` reduces it into
    ``[1, toy_bound]`` so the attack searches finish at desk scale.
    """

    mode: str = "hash"
    toy_bound: int = 0
    digest: str = "sha256"

    def __post_init__(self):
        if self.mode not in ("hash", "toy"):
            raise ValueError(f"unknown f mode {self.mode!r}")
        if self.mode == "toy" and not 2 <= self.toy_bound <= 2**32:
            raise ValueError("toy_bound must lie in [2, 2**32]")
        hashlib.new(self.digest)

    @classmethod
    def toy(cls, bound: int, digest: str = "sha256") -> "OneWayConfig":
        return cls("toy", bound, digest)


HASH_F = OneWayConfig()


def width_of(n: int) -> int:
    """Byte width of the canonical encoding of values mod ``n``."""
    return (n.bit_length() + 7) // 8


def fw_encode(x: int, w: int) -> bytes:
    if x < 0 or x.bit_length() > 8 * w:
        raise EncodingOverflow(f"{x} does not fit in {w} bytes")
    return x.to_bytes(w, "big")


def fw_decode(b: bytes) -> int:
    return int.from_bytes(b, "big")


def xor_fw(a: bytes, b: bytes) -> bytes:
    if len(a) != len(b):
        raise ValueError(f"xor of unequal lengths {len(a)} and {len(b)}")
    return bytes(x ^ y for x, y in zip(a, b))


def oneway_f(data: bytes, cfg: OneWayConfig, n: int) -> int:
    """Digest ``data`` and reduce into ``[1, n-1]`` (never zero)."""
    if n < 3:
        raise ValueError("modulus must be >= 3")
    h = int.from_bytes(hashlib.new(cfg.digest, data).digest(), "big")
    bound = n - 2
    if cfg.mode == "toy":
        bound = min(cfg.toy_bound, bound)
    return h % bound + 1


def f_pair(cid: int, t: int, cfg: OneWayConfig, n: int, w: int | None = None) -> int:
    """``f(CID, T)``: CID at modulus width, then an 8-byte timestamp."""
    w = w or width_of(n)
    return oneway_f(fw_encode(cid, w) + fw_encode(t, TIMESTAMP_WIDTH), cfg, n)


def f_pair_y(cid: int, y: int, cfg: OneWayConfig, n: int, w: int | None = None) -> int:
    """``f(CID, Y)``: both operands at modulus width."""
    w = w or width_of(n)
    return oneway_f(fw_encode(cid, w) + fw_encode(y, w), cfg, n)


def f_id_xor_d(id_: int, d: int, cfg: OneWayConfig, n: int, w: int | None = None) -> int:
    """``CID = f(ID xor d)`` over modulus-width encodings."""
    w = w or width_of(n)
    return oneway_f(xor_fw(fw_encode(id_, w), fw_encode(d, w)), cfg, n)


def cid_config(cfg: OneWayConfig) -> OneWayConfig:
    """Config for ``CID = f(ID xor d)``: always hash mode.

    A toy-range CID could be guessed in a handful of tries, which would undo
    the masking of the improved login.
    """
    return OneWayConfig("hash", digest=cfg.digest)


def password_to_int(pw: str, n: int, digest: str = "sha256") -> int:
    # always hash mode: toy f must never shrink the password space
    return oneway_f(pw.encode("utf-8"), OneWayConfig("hash", digest=digest), n)


class Clock(Protocol):
    def now(self) -> int: ...


class SystemClock:
    def now(self) -> int:
        return int(time.time())


class ManualClock:
    """Injectable clock for deterministic tests and the in-process lab."""

    def __init__(self, start: int = 1_700_000_000):
        self._t = start
        self._lock = threading.Lock()

    def now(self) -> int:
        with self._lock:
            return self._t

    def advance(self, seconds: int) -> int:
        with self._lock:
            self._t += seconds
            return self._t

    def set(self, t: int) -> None:
        with self._lock:
            self._t = t


@dataclass
class ClockPolicy:
    """Acceptance window ``delta_t`` plus a small allowance for clock skew."""

    delta_t: int = DEFAULT_DELTA_T
    skew: int = DEFAULT_SKEW
    clock: Clock = field(default_factory=SystemClock)

    def __post_init__(self):
        if self.delta_t < 1:
            raise ValueError("delta_t must be >= 1")
        if self.skew < 0:
            raise ValueError("skew must be >= 0")

    def now(self) -> int:
        return self.clock.now()

    def check(self, t_sent: int, t_recv: int) -> str | None:
        """Return ``None`` if fresh, else ``"stale"`` or ``"future"``."""
        if t_recv - t_sent > self.delta_t:
            return "stale"
        if t_sent - t_recv > self.skew:
            return "future"
        return None
