"""Forgery attacks on the baseline scheme, runnable against either verifier.

Each attack is split into a pure algebraic step (``*_forgery``) and a driver
(``attack_*``) that searches for a usable timestamp, builds the forged login
from intercepted material only, submits it and reports what happened.

Against the improved scheme the attacker cannot see ``CID`` or ``X``. The
drivers then run the same algebra with a guessed ``CID``, which is the best
an eavesdropper can do, and the verifier's verdict is recorded as usual.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field, fields
from typing import Callable, Iterator

from .codec import OneWayConfig, f_pair
from .improved import mask, recover_x
from .messages import LoginRequestImproved, LoginRequestShen, Reason, RejectNotice, Scheme, ServerResponse
from .numtheory import NotInvertible, PublicParams, ext_gcd, mod_inverse, mod_pow
from .registration import DuplicateId, IdFormatRejected, IdNotCoprime, KIC
from .transport.channel import Capture, ChannelSim, Tap
from .transport.wire import DecodeError, decode_message, encode_message

ATTACKS = ("euclid", "scale", "inverse_id", "unity")
DEFAULT_BUDGET = 10_000
# slack for channel latency when choosing a forged timestamp
WINDOW_MARGIN = 2


@dataclass(frozen=True)
class InterceptedMaterial:
    raw: bytes
    message: LoginRequestShen | LoginRequestImproved
    scheme: Scheme
    publics: PublicParams
    capture_time: int

    @classmethod
    def from_bytes(cls, raw: bytes, capture_time: int, f_config: OneWayConfig
                   ) -> "InterceptedMaterial":
        scheme, msg = decode_message(raw)
        if not isinstance(msg, (LoginRequestShen, LoginRequestImproved)):
            raise ValueError("capture is not a login request")
        return cls(raw, msg, scheme, PublicParams(msg.n, msg.e, msg.g, f_config), capture_time)


def channel_tap(channel: ChannelSim) -> Tap:
    """Attach a passive recorder to ``channel`` and return it."""
    tap = Tap()
    channel.attach_tap(tap)
    return tap


def intercepted_logins(captures, f_config: OneWayConfig) -> Iterator[InterceptedMaterial]:
    """Honest client-to-server login frames out of a tap, decoded."""
    for cap in captures:
        if cap.direction != "c2s" or cap.injected:
            continue
        try:
            yield InterceptedMaterial.from_bytes(cap.raw, cap.at, f_config)
        except (DecodeError, ValueError):
            continue


@dataclass
class Target:
    """Where forged logins go, plus the public freshness policy."""

    scheme: Scheme
    deliver: Callable[[bytes], bytes]
    delta_t: int = 60
    skew: int = 5

    @classmethod
    def via_channel(cls, channel: ChannelSim, scheme: Scheme, delta_t: int = 60,
                    skew: int = 5) -> "Target":
        return cls(scheme, channel.inject, delta_t, skew)

    def submit(self, msg) -> tuple[bool, Reason | None]:
        try:
            _, reply = decode_message(self.deliver(encode_message(msg)))
        except DecodeError as exc:
            return False, exc.reason
        if isinstance(reply, ServerResponse):
            return True, None
        if isinstance(reply, RejectNotice):
            return False, reply.reason
        return False, Reason.UNEXPECTED_MESSAGE

    def candidate_times(self, now: int) -> Iterator[int]:
        yield from range(now, now - self.delta_t + WINDOW_MARGIN - 1, -1)
        yield from range(now + 1, now + self.skew + 1)


@dataclass
class AttackContext:
    a: int | None = None
    u: int | None = None
    v: int | None = None
    w: int | None = None
    b: int | None = None
    k: int | None = None
    y: int | None = None
    t_attack: int | None = None
    id_f: int | None = None
    s_k: int | None = None
    s_i: int | None = None
    x_f: int | None = None
    y_f: int | None = None
    gcd: int | None = None
    cid_guess: int | None = None
    forged: object = field(default=None, repr=False)
    notes: list[str] = field(default_factory=list)


@dataclass
class AttackReport:
    attack: str
    scheme: Scheme
    outcome: str  # accepted | rejected | search_exhausted | aborted
    reason: str | None = None
    attempts: int = 0
    elapsed: float = 0.0
    context: AttackContext = field(default_factory=AttackContext)

    @property
    def accepted(self) -> bool:
        return self.outcome == "accepted"

    def to_line(self) -> str:
        parts = [f"attack={self.attack}", f"scheme={self.scheme.label}",
                 f"outcome={self.outcome}", f"reason={self.reason or '-'}",
                 f"attempts={self.attempts}", f"elapsed_ms={self.elapsed * 1000:.3f}"]
        for f in fields(AttackContext):
            value = getattr(self.context, f.name)
            if isinstance(value, int):
                parts.append(f"{f.name}={value}")
        for note in self.context.notes:
            parts.append("note=" + note.replace(" ", "_"))
        return " ".join(parts)

    @classmethod
    def from_line(cls, line: str) -> "AttackReport":
        kv: dict[str, str] = {}
        ctx = AttackContext()
        int_fields = {f.name for f in fields(AttackContext)} - {"forged", "notes"}
        for token in line.split():
            key, _, value = token.partition("=")
            if key == "note":
                ctx.notes.append(value.replace("_", " "))
            elif key in int_fields:
                setattr(ctx, key, int(value))
            else:
                kv[key] = value
        return cls(kv["attack"], Scheme.parse(kv["scheme"]), kv["outcome"],
                   None if kv["reason"] == "-" else kv["reason"], int(kv["attempts"]),
                   float(kv["elapsed_ms"]) / 1000, ctx)


def _signed_pow(base: int, exp: int, n: int) -> int:
    if exp < 0:
        return mod_pow(mod_inverse(base, n), -exp, n)
    return mod_pow(base, exp, n)


# -- algebra ---------------------------------------------------------------

def euclid_forgery(id_: int, e: int, a: int, n: int) -> tuple[int, int, int, int]:
    """``(u, v, X_f, Y_f)`` with ``e*u - a*v = 1``, ``X_f = ID^v``, ``Y_f = ID^u``."""
    g, u, v_neg = ext_gcd(e, a)
    if g != 1:
        raise NotInvertible(a, e, g)
    v = -v_neg
    return u, v, _signed_pow(id_, v, n), _signed_pow(id_, u, n)


def scale_forgery(x: int, a_orig: int, a_new: int, n: int) -> tuple[int, int]:
    """``(w, X^w)`` with ``w * a_new == a_orig``."""
    w, rem = divmod(a_orig, a_new)
    if rem:
        raise ValueError(f"{a_new} does not divide {a_orig}")
    return w, mod_pow(x, w, n)


def inverse_id_forgery(s_k: int, y: int, e: int, a: int, n: int) -> tuple[int, int, int]:
    """``(S_i, X_f, Y_f)``: ``S_i = S_k^-1``, ``X_f = y^e``, ``Y_f = S_i * y^a``."""
    s_i = mod_inverse(s_k, n)
    return s_i, mod_pow(y, e, n), s_i * mod_pow(y, a, n) % n


def unity_forgery(id_: int, k: int, e: int, a: int, b: int, n: int) -> tuple[int, int]:
    """``(X_f, Y_f)`` with ``X_f = ID^-b * k^e`` and ``Y_f = k^a``."""
    x_f = _signed_pow(id_, -b, n) * mod_pow(k, e, n) % n
    return x_f, mod_pow(k, a, n)


# -- drivers ---------------------------------------------------------------

def _cid_view(mat: InterceptedMaterial, rng: random.Random, ctx: AttackContext) -> int:
    if isinstance(mat.message, LoginRequestShen):
        return mat.message.cid
    ctx.cid_guess = rng.randrange(1, mat.publics.n)
    ctx.notes.append("cid unobservable, guessed")
    return ctx.cid_guess


def _x_view(mat: InterceptedMaterial, cid: int) -> int:
    m = mat.message
    if isinstance(m, LoginRequestShen):
        return m.x
    return recover_x(m.z, cid, m.y, mat.publics.f_config, mat.publics.n)


def _forge(mat: InterceptedMaterial, cid: int, x_f: int, y_f: int, t: int):
    m, pub = mat.message, mat.publics
    if isinstance(m, LoginRequestShen):
        return LoginRequestShen(m.id, cid, x_f, y_f, pub.n, pub.e, pub.g, t)
    z = mask(x_f, cid, y_f, pub.f_config, pub.n)
    return LoginRequestImproved(m.id, y_f, z, pub.n, pub.e, pub.g, t)


class _Run:
    """Bookkeeping shared by the drivers."""

    def __init__(self, name: str, target: Target):
        self.name = name
        self.target = target
        self.ctx = AttackContext()
        self.attempts = 0
        self.t0 = time.perf_counter()

    def report(self, outcome: str, reason: str | None = None) -> AttackReport:
        return AttackReport(self.name, self.target.scheme, outcome, reason, self.attempts,
                            time.perf_counter() - self.t0, self.ctx)

    def submit(self, forged) -> AttackReport:
        self.ctx.forged = forged
        ok, reason = self.target.submit(forged)
        if ok:
            return self.report("accepted")
        return self.report("rejected", reason.label if reason else None)


def attack_euclid(mat: InterceptedMaterial, target: Target, clock, rng: random.Random,
                  search_budget: int = DEFAULT_BUDGET) -> AttackReport:
    """Pick ``T_c`` with ``gcd(e, f(CID, T_c)) = 1`` and forge via Bezout."""
    run = _Run("euclid", target)
    pub, ctx = mat.publics, run.ctx
    cid = _cid_view(mat, rng, ctx)
    for t_c in target.candidate_times(clock.now()):
        if run.attempts >= search_budget:
            break
        run.attempts += 1
        a = f_pair(cid, t_c, pub.f_config, pub.n)
        g = math.gcd(pub.e, a)
        if g != 1:
            ctx.gcd = g
            continue
        ctx.a, ctx.t_attack, ctx.gcd = a, t_c, 1
        ctx.u, ctx.v, ctx.x_f, ctx.y_f = euclid_forgery(mat.message.id, pub.e, a, pub.n)
        return run.submit(_forge(mat, cid, ctx.x_f, ctx.y_f, t_c))
    if ctx.gcd and ctx.gcd > 1:
        ctx.notes.append(f"only gcd(e,a)={ctx.gcd} seen; gcd>1 variant not implemented")
    return run.report("search_exhausted")


def attack_scale(mat: InterceptedMaterial, target: Target, clock, rng: random.Random,
                 search_budget: int = DEFAULT_BUDGET) -> AttackReport:
    """Find ``T_f`` with ``f(CID, T_f) | f(CID, T)``; send ``X^w`` with the old ``Y``."""
    run = _Run("scale", target)
    pub, ctx, m = mat.publics, run.ctx, mat.message
    cid = _cid_view(mat, rng, ctx)
    x = _x_view(mat, cid)
    a_orig = f_pair(cid, m.t, pub.f_config, pub.n)
    for t_f in target.candidate_times(clock.now()):
        if run.attempts >= search_budget:
            break
        if t_f == m.t:
            continue
        run.attempts += 1
        a = f_pair(cid, t_f, pub.f_config, pub.n)
        if a_orig % a:
            continue
        ctx.a, ctx.t_attack = a, t_f
        ctx.w, ctx.x_f = scale_forgery(x, a_orig, a, pub.n)
        ctx.y_f = m.y
        return run.submit(_forge(mat, cid, ctx.x_f, m.y, t_f))
    return run.report("search_exhausted")


def attack_inverse_id(mat: InterceptedMaterial, target: Target, kic: KIC, clock,
                      rng: random.Random) -> AttackReport:
    """Enrol ``ID^-1`` at the KIC, invert its card secret, forge with random ``y``."""
    run = _Run("inverse_id", target)
    pub, ctx, m = mat.publics, run.ctx, mat.message
    cid = _cid_view(mat, rng, ctx)
    try:
        ctx.id_f = mod_inverse(m.id, pub.n)
    except NotInvertible:
        ctx.notes.append("gcd(ID, n) > 1 factors n")
        return run.report("aborted", "NotInvertible")
    run.attempts = 1
    try:
        card_f = kic.register(ctx.id_f, f"pw-{rng.getrandbits(32):08x}")
    except IdFormatRejected:
        return run.report("rejected", "IdFormatRejected")
    except (DuplicateId, IdNotCoprime) as exc:
        return run.report("aborted", type(exc).__name__)
    ctx.s_k = card_f.s
    ctx.y = rng.randrange(2, pub.n - 1)
    ctx.t_attack = clock.now()
    ctx.a = f_pair(cid, ctx.t_attack, pub.f_config, pub.n)
    ctx.s_i, ctx.x_f, ctx.y_f = inverse_id_forgery(ctx.s_k, ctx.y, pub.e, ctx.a, pub.n)
    return run.submit(_forge(mat, cid, ctx.x_f, ctx.y_f, ctx.t_attack))


def attack_unity(mat: InterceptedMaterial, target: Target, clock, rng: random.Random,
                 search_budget: int = DEFAULT_BUDGET, white_box: int | None = None
                 ) -> AttackReport:
    """Forge with ``b = a^-1``; ``X_f = ID^-b * k^e``, ``Y_f = k^a``.

    As literally described, ``b`` inverts ``a`` modulo ``n``. Passing
    ``white_box=phi(n)`` inverts it modulo ``(p-1)(q-1)`` instead, the modulus
    under which the exponents actually cancel. Only tests and the lab hand
    that value out.
    """
    run = _Run("unity", target)
    pub, ctx, m = mat.publics, run.ctx, mat.message
    cid = _cid_view(mat, rng, ctx)
    modulus = white_box if white_box is not None else pub.n
    ctx.notes.append("white-box" if white_box is not None else "black-box")
    for t_f in target.candidate_times(clock.now()):
        if run.attempts >= search_budget:
            break
        run.attempts += 1
        a = f_pair(cid, t_f, pub.f_config, pub.n)
        if math.gcd(a, modulus) != 1:
            continue
        ctx.a, ctx.t_attack = a, t_f
        ctx.b = mod_inverse(a, modulus)
        ctx.k = rng.randrange(2, pub.n - 1)
        try:
            ctx.x_f, ctx.y_f = unity_forgery(m.id, ctx.k, pub.e, a, ctx.b, pub.n)
        except NotInvertible:
            return run.report("aborted", "NotInvertible")
        return run.submit(_forge(mat, cid, ctx.x_f, ctx.y_f, t_f))
    return run.report("search_exhausted")
