"""Key file and card file formats.

Both are line-oriented ``name = value`` text under a version header.
Integers are lowercase hex with the same big-endian byte layout as the
wire; free-form strings (identities) are hex-encoded UTF-8, and the few
enumerated settings (``f_mode``, ``digest``, ``id_policy``) are plain words.
"""

from __future__ import annotations

import os
from pathlib import Path

from ..codec import OneWayConfig
from ..numtheory import SystemParams
from ..registration import KIC, CardData, IdPolicy, UserRecord

KEYFILE_HEADER = "tspa-keyfile 1"
CARDFILE_HEADER = "tspa-card 1"


class FileFormatError(ValueError):
    pass


def _hex(x: int) -> str:
    return format(x, "x")


def _text(s: str) -> str:
    return s.encode("utf-8").hex()


def _untext(h: str) -> str:
    return bytes.fromhex(h).decode("utf-8")


def _dump(header: str, items: list[tuple[str, str]]) -> str:
    return "\n".join([header] + [f"{k} = {v}" for k, v in items]) + "\n"


def _load(text: str, header: str) -> list[tuple[str, str]]:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0] != header:
        raise FileFormatError(f"expected header {header!r}")
    items = []
    for ln in lines[1:]:
        key, sep, value = ln.partition("=")
        if not sep:
            raise FileFormatError(f"malformed line {ln!r}")
        items.append((key.strip(), value.strip()))
    return items


def _f_items(cfg: OneWayConfig) -> list[tuple[str, str]]:
    return [("f_mode", cfg.mode), ("toy_bound", _hex(cfg.toy_bound)), ("digest", cfg.digest)]


def _f_config(kv: dict[str, str]) -> OneWayConfig:
    return OneWayConfig(kv["f_mode"], int(kv["toy_bound"], 16), kv["digest"])


def dump_kic(kic: KIC) -> str:
    p = kic.params
    items = [(name, _hex(getattr(p, name))) for name in ("p", "q", "n", "e", "d", "g")]
    items += _f_items(p.f_config)
    items += [("id_policy", kic.id_policy.mode), ("id_tag", _hex(kic.id_policy.tag))]
    for rec in sorted(kic.users.values(), key=lambda r: r.id):
        items.append(("user", f"{_hex(rec.id)}:{_hex(rec.enrolled_at)}:{_text(rec.identity)}"))
    return _dump(KEYFILE_HEADER, items)


def parse_kic(text: str, clock=None) -> KIC:
    items = _load(text, KEYFILE_HEADER)
    kv = {k: v for k, v in items if k != "user"}
    try:
        nums = {k: int(kv[k], 16) for k in ("p", "q", "n", "e", "d", "g")}
        params = SystemParams(**nums, f_config=_f_config(kv))
        policy = IdPolicy(kv["id_policy"], int(kv["id_tag"], 16))
        users = {}
        for k, v in items:
            if k == "user":
                id_hex, t_hex, ident = v.split(":")
                users[int(id_hex, 16)] = UserRecord(int(id_hex, 16), int(t_hex, 16), _untext(ident))
    except (KeyError, ValueError) as exc:
        raise FileFormatError(f"bad key file: {exc}") from exc
    params.check()
    kic = KIC(params, policy, users)
    if clock is not None:
        kic.clock = clock
    return kic


def dump_card(card: CardData) -> str:
    items = [(name, _hex(getattr(card, name))) for name in ("n", "e", "g", "id", "cid", "s", "h")]
    items += _f_items(card.f_config)
    items.append(("identity", _text(card.identity)))
    return _dump(CARDFILE_HEADER, items)


def parse_card(text: str) -> CardData:
    kv = dict(_load(text, CARDFILE_HEADER))
    try:
        nums = {k: int(kv[k], 16) for k in ("n", "e", "g", "id", "cid", "s", "h")}
        return CardData(**nums, f_config=_f_config(kv), identity=_untext(kv.get("identity", "")))
    except (KeyError, ValueError) as exc:
        raise FileFormatError(f"bad card file: {exc}") from exc


def _write_private(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
    os.fchmod(fd, 0o600)  # an existing file keeps its old mode otherwise
    with os.fdopen(fd, "w") as fh:
        fh.write(text)


def save_kic(kic: KIC, path) -> None:
    _write_private(path, dump_kic(kic))


def load_kic(path, clock=None) -> KIC:
    return parse_kic(Path(path).read_text(), clock)


def save_card(card: CardData, path) -> None:
    _write_private(path, dump_card(card))


def load_card(path) -> CardData:
    return parse_card(Path(path).read_text())
