"""Improved scheme: 7-field login where ``Z = X xor CID xor f(CID, Y)``.

Neither ``X`` nor ``CID`` is sent. The server recomputes ``CID`` from the
secret ``d`` and strips the mask to recover ``X``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .codec import cid_config, f_id_xor_d, f_pair, f_pair_y, fw_decode, fw_encode, width_of, xor_fw
from .codec import OneWayConfig
from .messages import LoginRequestImproved, Reason, ServerResponse
from .numtheory import SystemParams
from .registration import CardData
from .shen import ServerPolicy, congruence, finish, login_xy, params_match, window_reason


@dataclass
class ImprovedVerificationTrace:
    window_ok: bool | None = None
    cid_prime: int | None = None
    val: int | None = None
    x_recovered: int | None = None
    lhs: int | None = None
    rhs: int | None = None
    reason: Reason | None = None

    @property
    def accepted(self) -> bool:
        return self.reason is None and self.lhs is not None and self.lhs == self.rhs


def mask(x: int, cid: int, y: int, cfg: OneWayConfig, n: int) -> bytes:
    w = width_of(n)
    pad = xor_fw(fw_encode(cid, w), fw_encode(f_pair_y(cid, y, cfg, n, w), w))
    return xor_fw(fw_encode(x, w), pad)


def recover_x(z: bytes, cid_prime: int, y: int, cfg: OneWayConfig, n: int) -> int:
    """Strip ``CID' xor f(CID', Y)`` off ``z``; exact ``X`` when ``CID' == CID``."""
    w = len(z)
    pad = xor_fw(fw_encode(cid_prime, w), fw_encode(f_pair_y(cid_prime, y, cfg, n, w), w))
    return fw_decode(xor_fw(z, pad))


def improved_login(card: CardData, pw: str, r_i: int, t: int) -> LoginRequestImproved:
    x, y = login_xy(card, pw, r_i, t)
    z = mask(x, card.cid, y, card.f_config, card.n)
    return LoginRequestImproved(card.id, y, z, card.n, card.e, card.g, t)


def improved_verify(params: SystemParams, policy: ServerPolicy, m: LoginRequestImproved,
                    t_recv: int | None = None
                    ) -> tuple[ImprovedVerificationTrace, ServerResponse | None]:
    """Server side: ID format, freshness, unmask X, then the congruence."""
    trace = ImprovedVerificationTrace()
    t_recv = policy.clock.now() if t_recv is None else t_recv
    n = params.n
    if not params_match(params, m.n, m.e, m.g):
        trace.reason = Reason.PARAM_MISMATCH
        return trace, None
    if not policy.id_policy.check(m.id, n):
        trace.reason = Reason.BAD_ID_FORMAT
        return trace, None
    trace.reason = window_reason(policy.clock, m.t, t_recv)
    trace.window_ok = trace.reason is None
    if not trace.window_ok:
        return trace, None
    if len(m.z) != width_of(n) or not 0 <= m.y < n:
        trace.reason = Reason.CONGRUENCE_FAILED
        return trace, None
    trace.cid_prime = f_id_xor_d(m.id, params.d, cid_config(params.f_config), n)
    trace.val = f_pair_y(trace.cid_prime, m.y, params.f_config, n)
    trace.x_recovered = recover_x(m.z, trace.cid_prime, m.y, params.f_config, n)
    if trace.x_recovered >= n:
        trace.reason = Reason.CONGRUENCE_FAILED
        return trace, None
    a = f_pair(trace.cid_prime, m.t, params.f_config, n)
    trace.lhs, trace.rhs = congruence(params, m.id, trace.x_recovered, m.y, a)
    return trace, finish(params, policy, trace, m.id, m.t, trace.cid_prime)
