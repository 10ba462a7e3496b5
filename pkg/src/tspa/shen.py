"""Baseline timestamp scheme: 8-field login, server check, server token.

This is the vulnerable variant the attacks in :mod:`tspa.adversary` target,
kept exactly as published.
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass, field

from .codec import ClockPolicy, cid_config, f_id_xor_d, f_pair, password_to_int
from .messages import LoginRequestShen, Reason, ServerResponse
from .numtheory import SystemParams, mod_pow
from .registration import CardData, IdPolicy


class ReplayCache:
    """Seen ``(id, t)`` pairs, kept for the life of the acceptance window.

    ``check_and_store`` is atomic, so a duplicate never double-accepts even
    when copies arrive concurrently.
    """

    def __init__(self, retention: int):
        self.retention = retention
        self._seen: dict[tuple[int, int], int] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._seen)

    def check_and_store(self, id_: int, t: int, now: int) -> bool:
        with self._lock:
            cutoff = now - self.retention
            if len(self._seen) > 1024:
                self._seen = {k: v for k, v in self._seen.items() if v >= cutoff}
            key = (id_, t)
            if key in self._seen and self._seen[key] >= cutoff:
                return False
            self._seen[key] = t
            return True


@dataclass
class ServerPolicy:
    clock: ClockPolicy = field(default_factory=ClockPolicy)
    id_policy: IdPolicy = field(default_factory=IdPolicy)
    replay: ReplayCache | None = None

    @classmethod
    def with_replay_cache(cls, clock: ClockPolicy, id_policy: IdPolicy) -> "ServerPolicy":
        return cls(clock, id_policy, ReplayCache(clock.delta_t + clock.skew))


@dataclass
class ShenVerificationTrace:
    cid_prime: int | None = None
    window_ok: bool | None = None
    lhs: int | None = None
    rhs: int | None = None
    reason: Reason | None = None

    @property
    def accepted(self) -> bool:
        return self.reason is None and self.lhs is not None and self.lhs == self.rhs


@dataclass(frozen=True)
class ServerAuthResult:
    r_prime: int | None
    expected: int | None
    ok: bool
    reason: Reason | None = None


def draw_r(rng: random.Random, n: int) -> int:
    return rng.randrange(2, n - 1)


def login_xy(card: CardData, pw: str, r_i: int, t: int) -> tuple[int, int]:
    """X = g^(r*PW), Y = S * h^(r*f(CID, T)), both mod n."""
    n = card.n
    pw_int = password_to_int(pw, n, card.f_config.digest)
    a = f_pair(card.cid, t, card.f_config, n)
    x = mod_pow(card.g, r_i * pw_int, n)
    y = card.s * mod_pow(card.h, r_i * a, n) % n
    return x, y


def shen_login(card: CardData, pw: str, r_i: int, t: int) -> LoginRequestShen:
    x, y = login_xy(card, pw, r_i, t)
    return LoginRequestShen(card.id, card.cid, x, y, card.n, card.e, card.g, t)


def params_match(params: SystemParams, n: int, e: int, g: int) -> bool:
    return (n, e, g) == (params.n, params.e, params.g)


def window_reason(clock: ClockPolicy, t: int, t_recv: int) -> Reason | None:
    verdict = clock.check(t, t_recv)
    if verdict == "stale":
        return Reason.STALE_TIMESTAMP
    if verdict == "future":
        return Reason.FUTURE_TIMESTAMP
    return None


def congruence(params: SystemParams, id_: int, x: int, y: int, a: int) -> tuple[int, int]:
    """Both sides of ``Y^e == ID * X^a (mod n)``."""
    n = params.n
    return mod_pow(y, params.e, n), id_ * mod_pow(x, a, n) % n


def server_token(params: SystemParams, cid: int, t_now: int) -> ServerResponse:
    r = mod_pow(f_pair(cid, t_now, params.f_config, params.n), params.d, params.n)
    return ServerResponse(r, t_now)


def finish(params: SystemParams, policy: ServerPolicy, trace, id_: int, t: int,
           cid: int) -> ServerResponse | None:
    """Replay bookkeeping and the server token for an accepted login."""
    if not trace.accepted:
        if trace.reason is None:
            trace.reason = Reason.CONGRUENCE_FAILED
        return None
    t_now = policy.clock.now()
    if policy.replay is not None and not policy.replay.check_and_store(id_, t, t_now):
        trace.reason = Reason.REPLAYED
        return None
    return server_token(params, cid, t_now)


def shen_verify(params: SystemParams, policy: ServerPolicy, m: LoginRequestShen,
                t_recv: int | None = None) -> tuple[ShenVerificationTrace, ServerResponse | None]:
    """Server side: ID format, CID, freshness, then the congruence."""
    trace = ShenVerificationTrace()
    t_recv = policy.clock.now() if t_recv is None else t_recv
    n = params.n
    if not params_match(params, m.n, m.e, m.g):
        trace.reason = Reason.PARAM_MISMATCH
        return trace, None
    if not policy.id_policy.check(m.id, n):
        trace.reason = Reason.BAD_ID_FORMAT
        return trace, None
    trace.cid_prime = f_id_xor_d(m.id, params.d, cid_config(params.f_config), n)
    if trace.cid_prime != m.cid:
        trace.reason = Reason.CID_MISMATCH
        return trace, None
    trace.reason = window_reason(policy.clock, m.t, t_recv)
    trace.window_ok = trace.reason is None
    if not trace.window_ok:
        return trace, None
    if not (0 <= m.x < n and 0 <= m.y < n):
        trace.reason = Reason.CONGRUENCE_FAILED
        return trace, None
    a = f_pair(trace.cid_prime, m.t, params.f_config, n)
    trace.lhs, trace.rhs = congruence(params, m.id, m.x, m.y, a)
    return trace, finish(params, policy, trace, m.id, m.t, trace.cid_prime)


def verify_server_response(card: CardData, resp: ServerResponse, t_recv: int,
                           clock: ClockPolicy) -> ServerAuthResult:
    """Client side: freshness of ``T''`` then ``R^e == f(CID, T'') (mod n)``."""
    reason = window_reason(clock, resp.t2, t_recv)
    if reason is not None:
        return ServerAuthResult(None, None, False, reason)
    if not 0 <= resp.r < card.n:
        return ServerAuthResult(None, None, False, Reason.TOKEN_MISMATCH)
    r_prime = mod_pow(resp.r, card.e, card.n)
    expected = f_pair(card.cid, resp.t2, card.f_config, card.n)
    ok = r_prime == expected
    return ServerAuthResult(r_prime, expected, ok, None if ok else Reason.TOKEN_MISMATCH)
