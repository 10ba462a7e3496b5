"""The Key Information Center: setup, card issuance and password renewal.

Registration runs over a trusted channel, so it is modelled as a plain
in-process call.
"""

from __future__ import annotations

import hashlib
import math
import random
import threading
from dataclasses import dataclass, field, replace

from .codec import (HASH_F, OneWayConfig, SystemClock, cid_config, f_id_xor_d,
                    password_to_int, width_of)
from .numtheory import SystemParams, gen_system_params, mod_pow

DEFAULT_TAG = 0xA11C
TAG_BITS = 16


class RegistrationError(Exception):
    pass


class DuplicateId(RegistrationError):
    pass


class IdFormatRejected(RegistrationError):
    pass


class IdNotCoprime(RegistrationError):
    pass


class UnknownId(RegistrationError):
    pass


class OldPasswordMismatch(RegistrationError):
    pass


@dataclass(frozen=True)
class IdPolicy:
    """ID format rule checked by the KIC and by the verifier's first step.

    In strict mode an ID is exactly ``nbits - 1`` bits long and its top 16
    bits equal ``tag``, so every valid ID stays below ``n``.
    """

    mode: str = "strict"
    tag: int = DEFAULT_TAG

    def __post_init__(self):
        if self.mode not in ("strict", "permissive"):
            raise ValueError(f"unknown id policy {self.mode!r}")
        if not (1 << (TAG_BITS - 1)) <= self.tag < (1 << TAG_BITS):
            raise ValueError("tag must be a 16-bit value with its top bit set")

    @classmethod
    def permissive(cls) -> "IdPolicy":
        return cls("permissive")

    def check(self, id_: int, n: int) -> bool:
        if self.mode == "permissive":
            return 2 <= id_ <= n - 2
        body_bits = n.bit_length() - 1 - TAG_BITS
        if body_bits < TAG_BITS:
            return False
        return id_ >> body_bits == self.tag and id_.bit_length() == n.bit_length() - 1


def check_id_format(policy: IdPolicy, id_: int, n: int) -> bool:
    return policy.check(id_, n)


@dataclass(frozen=True)
class CardData:
    """Contents of a smart card as issued by the KIC."""

    n: int
    e: int
    g: int
    id: int
    cid: int
    s: int
    h: int
    f_config: OneWayConfig = HASH_F
    identity: str = ""

    @property
    def modulus_width(self) -> int:
        return width_of(self.n)


@dataclass(frozen=True)
class UserRecord:
    id: int
    enrolled_at: int
    identity: str = ""


@dataclass
class KIC:
    params: SystemParams
    id_policy: IdPolicy = field(default_factory=IdPolicy)
    users: dict[int, UserRecord] = field(default_factory=dict)
    clock: object = field(default_factory=SystemClock, repr=False)

    def __post_init__(self):
        self._lock = threading.Lock()
        if self.id_policy.mode == "strict" and self.params.n.bit_length() < 2 * TAG_BITS + 1:
            raise ValueError("strict ID policy needs a modulus of at least 33 bits")

    @classmethod
    def setup(cls, bits: int, rng: random.Random, e_choice: int | None = None,
              f_config: OneWayConfig | None = None, id_policy: IdPolicy | None = None,
              clock=None) -> "KIC":
        params = gen_system_params(bits, rng, e_choice, f_config)
        return cls(params, id_policy or IdPolicy(), clock=clock or SystemClock())

    def public_info(self) -> dict[str, int]:
        return {"n": self.params.n, "e": self.params.e, "g": self.params.g}

    def derive_id(self, identity: str) -> int:
        """Map an identity string to an ID that passes the policy and is coprime to n."""
        n = self.params.n
        for counter in range(1 << 16):
            digest = hashlib.sha256(identity.encode("utf-8") + counter.to_bytes(4, "big")).digest()
            h = int.from_bytes(digest * (1 + 8 * width_of(n) // 256), "big")
            if self.id_policy.mode == "strict":
                body_bits = n.bit_length() - 1 - TAG_BITS
                id_ = (self.id_policy.tag << body_bits) | (h % (1 << body_bits))
            else:
                id_ = h % (n - 3) + 2
            if math.gcd(id_, n) == 1:
                return id_
        raise IdNotCoprime(f"could not derive a usable ID for {identity!r}")

    def _issue(self, id_: int, pw: str, identity: str) -> CardData:
        p = self.params
        pw_int = password_to_int(pw, p.n, p.f_config.digest)
        return CardData(
            n=p.n, e=p.e, g=p.g, id=id_,
            cid=f_id_xor_d(id_, p.d, cid_config(p.f_config), p.n),
            s=mod_pow(id_, p.d, p.n),
            h=mod_pow(p.g, pw_int * p.d, p.n),
            f_config=p.f_config,
            identity=identity,
        )

    def register(self, identity: str | int, pw: str) -> CardData:
        """Issue a card for an identity string or an explicit integer ID."""
        n = self.params.n
        if isinstance(identity, int):
            id_, name = identity, ""
        else:
            id_, name = self.derive_id(identity), identity
        if not self.id_policy.check(id_, n):
            raise IdFormatRejected(f"ID {id_:#x} rejected by {self.id_policy.mode} policy")
        if math.gcd(id_, n) != 1:
            raise IdNotCoprime(f"ID {id_:#x} shares a factor with n")
        with self._lock:
            if id_ in self.users:
                raise DuplicateId(f"ID {id_:#x} already enrolled")
            self.users[id_] = UserRecord(id_, self.clock.now(), name)
        return self._issue(id_, pw, name)

    def lookup(self, identity: str) -> UserRecord:
        for rec in self.users.values():
            if rec.identity == identity:
                return rec
        raise UnknownId(identity)

    def renew_password(self, card: CardData, old_pw: str, new_pw: str) -> CardData:
        """Re-issue the password-dependent part of an enrolled card.

        ``S`` and ``CID`` do not depend on the password and are kept. The old password is authenticated with ``h^e == g^pw_old (mod n)``,
        which needs nothing beyond the card itself.
        """
        p = self.params
        if card.id not in self.users:
            raise UnknownId(f"ID {card.id:#x} is not enrolled")
        if mod_pow(card.s, p.e, p.n) != card.id:
            raise OldPasswordMismatch("card secret does not match its ID")
        old_int = password_to_int(old_pw, p.n, p.f_config.digest)
        if mod_pow(card.h, p.e, p.n) != mod_pow(p.g, old_int, p.n):
            raise OldPasswordMismatch("old password does not match the card")
        fresh = self._issue(card.id, new_pw, card.identity)
        return replace(card, h=fresh.h)

