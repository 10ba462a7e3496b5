"""Binary frame layout.

::

    magic "TSPA" | version | scheme | msg_type | field_count
    field_count x ( tag:1 | length:4 big-endian | value )

Values mod n are written at the modulus width, timestamps as 8 bytes,
``n``, ``e``, ``g`` as minimal big-endian.
"""

from __future__ import annotations

import enum
import struct
from typing import Callable

from ..codec import TIMESTAMP_WIDTH, width_of
from ..messages import (AcceptNotice, LoginRequestImproved, LoginRequestShen, Reason,
                        RejectNotice, Scheme, ServerResponse)

MAGIC = b"TSPA"
VERSION = 0x01
MAX_FIELD_LEN = 4096

_HEADER = struct.Struct("!4sBBBB")
_FIELD = struct.Struct("!BI")


class MsgType(enum.IntEnum):
    LOGIN = 0x01
    RESPONSE = 0x02
    REJECT = 0x03
    ACCEPT = 0x04


class Tag(enum.IntEnum):
    ID = 0x01
    CID = 0x02
    X = 0x03
    Y = 0x04
    Z = 0x05
    N = 0x06
    E = 0x07
    G = 0x08
    T = 0x09
    R = 0x0A
    T2 = 0x0B
    REASON = 0x0C


_SHEN_LOGIN = (Tag.ID, Tag.CID, Tag.X, Tag.Y, Tag.N, Tag.E, Tag.G, Tag.T)
_IMPROVED_LOGIN = (Tag.ID, Tag.Y, Tag.Z, Tag.N, Tag.E, Tag.G, Tag.T)
_LAYOUTS = {
    MsgType.LOGIN: {Scheme.SHEN: _SHEN_LOGIN, Scheme.IMPROVED: _IMPROVED_LOGIN},
    MsgType.RESPONSE: (Tag.R, Tag.T2),
    MsgType.REJECT: (Tag.REASON,),
    MsgType.ACCEPT: (Tag.T,),
}
_MOD_N = {Tag.ID, Tag.CID, Tag.X, Tag.Y, Tag.Z}


class WireError(Exception):
    pass


class FieldOverflow(WireError):
    pass


class DecodeError(WireError):
    """A frame failed validation; ``reason`` says which rule it broke."""

    def __init__(self, reason: Reason, detail: str = ""):
        super().__init__(f"{reason.label}: {detail}" if detail else reason.label)
        self.reason = reason


class ConnectionClosed(WireError):
    pass


def layout(msg_type: MsgType, scheme: Scheme) -> tuple[Tag, ...]:
    entry = _LAYOUTS[msg_type]
    return entry[scheme] if isinstance(entry, dict) else entry


def _minimal(x: int) -> bytes:
    if x < 0:
        raise FieldOverflow("negative value")
    return x.to_bytes(max(1, (x.bit_length() + 7) // 8), "big")


def _fixed(x: int, w: int) -> bytes:
    if x < 0 or x.bit_length() > 8 * w:
        raise FieldOverflow(f"{x} does not fit in {w} bytes")
    return x.to_bytes(w, "big")


def _fields_of(msg, width: int | None) -> tuple[MsgType, dict[Tag, bytes]]:
    if isinstance(msg, (LoginRequestShen, LoginRequestImproved)):
        w = width_of(msg.n)
        out = {Tag.ID: _fixed(msg.id, w), Tag.Y: _fixed(msg.y, w),
               Tag.N: _minimal(msg.n), Tag.E: _minimal(msg.e), Tag.G: _minimal(msg.g),
               Tag.T: _fixed(msg.t, TIMESTAMP_WIDTH)}
        if isinstance(msg, LoginRequestShen):
            out[Tag.CID] = _fixed(msg.cid, w)
            out[Tag.X] = _fixed(msg.x, w)
        else:
            if len(msg.z) != w:
                raise FieldOverflow(f"Z must be {w} bytes, got {len(msg.z)}")
            out[Tag.Z] = bytes(msg.z)
        return MsgType.LOGIN, out
    if isinstance(msg, ServerResponse):
        r = _fixed(msg.r, width) if width else _minimal(msg.r)
        return MsgType.RESPONSE, {Tag.R: r, Tag.T2: _fixed(msg.t2, TIMESTAMP_WIDTH)}
    if isinstance(msg, RejectNotice):
        return MsgType.REJECT, {Tag.REASON: bytes([int(msg.reason)])}
    if isinstance(msg, AcceptNotice):
        return MsgType.ACCEPT, {Tag.T: _fixed(msg.t, TIMESTAMP_WIDTH)}
    raise TypeError(f"not a protocol message: {type(msg).__name__}")


def scheme_of(msg) -> Scheme | None:
    if isinstance(msg, LoginRequestShen):
        return Scheme.SHEN
    if isinstance(msg, LoginRequestImproved):
        return Scheme.IMPROVED
    return None


def encode_message(msg, scheme: Scheme | None = None, width: int | None = None) -> bytes:
    """Encode a logical message. Login messages imply their scheme; the
    others need it passed in. ``width`` pads a server ``R`` to modulus width."""
    implied = scheme_of(msg)
    if implied is not None:
        if scheme is not None and scheme != implied:
            raise ValueError(f"{type(msg).__name__} cannot be sent as {scheme.label}")
        scheme = implied
    if scheme is None:
        raise ValueError("scheme is required for non-login messages")
    msg_type, values = _fields_of(msg, width)
    tags = layout(msg_type, scheme)
    parts = [_HEADER.pack(MAGIC, VERSION, int(scheme), int(msg_type), len(tags))]
    for tag in tags:
        value = values[tag]
        parts.append(_FIELD.pack(int(tag), len(value)) + value)
    return b"".join(parts)


def _parse_header(data: bytes) -> tuple[Scheme, MsgType, int]:
    magic, version, scheme, msg_type, count = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise DecodeError(Reason.BAD_MAGIC, repr(magic))
    if version != VERSION:
        raise DecodeError(Reason.BAD_VERSION, str(version))
    try:
        scheme = Scheme(scheme)
    except ValueError:
        raise DecodeError(Reason.BAD_SCHEME, str(scheme)) from None
    try:
        msg_type = MsgType(msg_type)
    except ValueError:
        raise DecodeError(Reason.BAD_MSG_TYPE, str(msg_type)) from None
    return scheme, msg_type, count


def _int(raw: bytes, tag: Tag) -> int:
    if not raw:
        raise DecodeError(Reason.BAD_FIELD_VALUE, f"empty {tag.name}")
    return int.from_bytes(raw, "big")


def _build(scheme: Scheme, msg_type: MsgType, f: dict[Tag, bytes]):
    for tag in (Tag.T, Tag.T2):
        if tag in f and len(f[tag]) != TIMESTAMP_WIDTH:
            raise DecodeError(Reason.BAD_FIELD_VALUE, f"{tag.name} must be 8 bytes")
    if msg_type is MsgType.LOGIN:
        n = _int(f[Tag.N], Tag.N)
        if n < 3:
            raise DecodeError(Reason.BAD_FIELD_VALUE, "modulus below 3")
        w = width_of(n)
        for tag in _MOD_N & f.keys():
            if len(f[tag]) != w:
                raise DecodeError(Reason.BAD_FIELD_VALUE, f"{tag.name} must be {w} bytes")
        common = dict(id=_int(f[Tag.ID], Tag.ID), y=_int(f[Tag.Y], Tag.Y), n=n,
                      e=_int(f[Tag.E], Tag.E), g=_int(f[Tag.G], Tag.G),
                      t=_int(f[Tag.T], Tag.T))
        if scheme is Scheme.SHEN:
            return LoginRequestShen(cid=_int(f[Tag.CID], Tag.CID), x=_int(f[Tag.X], Tag.X),
                                    **common)
        return LoginRequestImproved(z=f[Tag.Z], **common)
    if msg_type is MsgType.RESPONSE:
        return ServerResponse(_int(f[Tag.R], Tag.R), _int(f[Tag.T2], Tag.T2))
    if msg_type is MsgType.REJECT:
        raw = f[Tag.REASON]
        try:
            if len(raw) != 1:
                raise ValueError
            return RejectNotice(Reason(raw[0]))
        except ValueError:
            raise DecodeError(Reason.BAD_FIELD_VALUE, "unknown reason code") from None
    return AcceptNotice(_int(f[Tag.T], Tag.T))


def decode_message(data: bytes) -> tuple[Scheme, object]:
    """Strictly validate a frame and return ``(scheme, message)``.

    Raises :class:`DecodeError` for every malformed input.
    """
    data = bytes(data)
    if len(data) < _HEADER.size:
        if not MAGIC.startswith(data[:4]):
            raise DecodeError(Reason.BAD_MAGIC)
        raise DecodeError(Reason.TRUNCATED_FIELD, "short header")
    scheme, msg_type, count = _parse_header(data)
    pos = _HEADER.size
    fields: dict[Tag, bytes] = {}
    unexpected = []
    for _ in range(count):
        if pos + _FIELD.size > len(data):
            raise DecodeError(Reason.TRUNCATED_FIELD, "field header")
        tag, length = _FIELD.unpack_from(data, pos)
        pos += _FIELD.size
        if length > MAX_FIELD_LEN:
            raise DecodeError(Reason.OVERSIZE_FIELD, f"{length} bytes")
        if pos + length > len(data):
            raise DecodeError(Reason.TRUNCATED_FIELD, f"tag {tag:#x}")
        value = data[pos:pos + length]
        pos += length
        try:
            tag = Tag(tag)
        except ValueError:
            unexpected.append(tag)
            continue
        if tag in fields:
            raise DecodeError(Reason.DUPLICATE_TAG, tag.name)
        fields[tag] = value
    if pos != len(data):
        raise DecodeError(Reason.TRAILING_BYTES, f"{len(data) - pos} bytes")
    expected = layout(msg_type, scheme)
    missing = [t.name for t in expected if t not in fields]
    if missing:
        raise DecodeError(Reason.MISSING_FIELD, ",".join(missing))
    extra = unexpected + [t for t in fields if t not in expected]
    if extra:
        raise DecodeError(Reason.UNEXPECTED_FIELD, str(extra))
    return scheme, _build(scheme, msg_type, fields)


def read_frame(recv_exact: Callable[[int], bytes]) -> bytes:
    """Pull exactly one frame off a stream.

    ``recv_exact(k)`` returns up to ``k`` bytes, fewer only at end of stream.
    Header problems are raised early so a hostile peer cannot stall us on a
    bogus length.
    """
    head = recv_exact(_HEADER.size)
    if not head:
        raise ConnectionClosed()
    if len(head) < _HEADER.size:
        raise DecodeError(Reason.TRUNCATED_FIELD, "short header")
    _, _, count = _parse_header(head)
    parts = [head]
    for _ in range(count):
        fh = recv_exact(_FIELD.size)
        parts.append(fh)
        if len(fh) < _FIELD.size:
            raise DecodeError(Reason.TRUNCATED_FIELD, "field header")
        _, length = _FIELD.unpack(fh)
        if length > MAX_FIELD_LEN:
            raise DecodeError(Reason.OVERSIZE_FIELD, f"{length} bytes")
        value = recv_exact(length)
        parts.append(value)
        if len(value) < length:
            raise DecodeError(Reason.TRUNCATED_FIELD, "field value")
    return b"".join(parts)
