"""Logical protocol messages and the reject-reason enumeration."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Scheme(enum.IntEnum):
    SHEN = 0x00
    IMPROVED = 0x01

    @classmethod
    def parse(cls, name: str) -> "Scheme":
        return {"shen": cls.SHEN, "improved": cls.IMPROVED}[name.lower()]

    @property
    def label(self) -> str:
        return self.name.lower()


class Reason(enum.IntEnum):
    """Why a message was refused. The value is the 1-byte wire code."""

    BAD_ID_FORMAT = 0x01
    CID_MISMATCH = 0x02
    STALE_TIMESTAMP = 0x03
    FUTURE_TIMESTAMP = 0x04
    CONGRUENCE_FAILED = 0x05
    REPLAYED = 0x06
    PARAM_MISMATCH = 0x07
    WRONG_SCHEME = 0x08
    TOKEN_MISMATCH = 0x09
    UNEXPECTED_MESSAGE = 0x0A
    # frame decoding
    BAD_MAGIC = 0x20
    BAD_VERSION = 0x21
    BAD_SCHEME = 0x22
    BAD_MSG_TYPE = 0x23
    TRUNCATED_FIELD = 0x24
    DUPLICATE_TAG = 0x25
    MISSING_FIELD = 0x26
    UNEXPECTED_FIELD = 0x27
    TRAILING_BYTES = 0x28
    BAD_FIELD_VALUE = 0x29
    OVERSIZE_FIELD = 0x2A

    @property
    def label(self) -> str:
        return "".join(part.capitalize() for part in self.name.split("_"))

    @classmethod
    def from_label(cls, label: str) -> "Reason":
        for r in cls:
            if r.label == label:
                return r
        raise ValueError(label)


@dataclass(frozen=True)
class LoginRequestShen:
    id: int
    cid: int
    x: int
    y: int
    n: int
    e: int
    g: int
    t: int

    FIELD_COUNT = 8


@dataclass(frozen=True)
class LoginRequestImproved:
    id: int
    y: int
    z: bytes
    n: int
    e: int
    g: int
    t: int

    FIELD_COUNT = 7


@dataclass(frozen=True)
class ServerResponse:
    r: int
    t2: int


@dataclass(frozen=True)
class RejectNotice:
    reason: Reason


@dataclass(frozen=True)
class AcceptNotice:
    """Sent by the client once the server's token has checked out."""

    t: int


LoginRequest = LoginRequestShen | LoginRequestImproved
