"""Verifier endpoint, loopback TCP service and the client session."""

from __future__ import annotations

import logging
import os
import random
import socket
import socketserver
import threading
from collections import Counter
from dataclasses import dataclass
from typing import Callable

from ..codec import ClockPolicy, width_of
from ..improved import improved_login, improved_verify
from ..messages import (AcceptNotice, LoginRequestImproved, LoginRequestShen, Reason,
                        RejectNotice, Scheme, ServerResponse)
from ..numtheory import SystemParams
from ..registration import CardData, IdPolicy
from ..shen import (ServerAuthResult, ServerPolicy, draw_r, shen_login, shen_verify,
                    verify_server_response)
from .wire import ConnectionClosed, DecodeError, decode_message, encode_message, read_frame

log = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 10.0
DEFAULT_ADDR = "127.0.0.1:7411"


def default_policy(scheme: Scheme, clock: ClockPolicy | None = None,
                   id_policy: IdPolicy | None = None,
                   replay_cache: bool | None = None) -> ServerPolicy:
    """Replay cache defaults to off for the baseline scheme, on for the improved one."""
    clock = clock or ClockPolicy()
    id_policy = id_policy or IdPolicy()
    if replay_cache is None:
        replay_cache = scheme is Scheme.IMPROVED
    if replay_cache:
        return ServerPolicy.with_replay_cache(clock, id_policy)
    return ServerPolicy(clock, id_policy)


def parse_addr(addr: str | None) -> tuple[str, int]:
    addr = addr or os.environ.get("TSPA_ADDR") or DEFAULT_ADDR
    host, _, port = addr.rpartition(":")
    return host or "127.0.0.1", int(port)


class AuthEndpoint:
    """Turns one login frame into one reply frame. Never raises on bad input."""

    def __init__(self, params: SystemParams, scheme: Scheme, policy: ServerPolicy):
        self.params = params
        self.scheme = scheme
        self.policy = policy
        self.stats: Counter[str] = Counter()
        self._lock = threading.Lock()

    def _count(self, key: str) -> None:
        with self._lock:
            self.stats[key] += 1

    def verify(self, msg, t_recv: int | None = None):
        if isinstance(msg, LoginRequestShen):
            return shen_verify(self.params, self.policy, msg, t_recv)
        return improved_verify(self.params, self.policy, msg, t_recv)

    def reject(self, reason: Reason) -> bytes:
        self._count(reason.label)
        return encode_message(RejectNotice(reason), self.scheme)

    def process(self, frame: bytes) -> tuple[bytes, bool]:
        """Return the reply frame and whether the login was accepted."""
        try:
            scheme, msg = decode_message(frame)
        except DecodeError as exc:
            return self.reject(exc.reason), False
        if scheme is not self.scheme:
            return self.reject(Reason.WRONG_SCHEME), False
        if not isinstance(msg, (LoginRequestShen, LoginRequestImproved)):
            return self.reject(Reason.UNEXPECTED_MESSAGE), False
        trace, resp = self.verify(msg)
        if resp is None:
            return self.reject(trace.reason or Reason.CONGRUENCE_FAILED), False
        self._count("accepted")
        return encode_message(resp, self.scheme, width_of(self.params.n)), True

    def handle_frame(self, frame: bytes) -> bytes:
        return self.process(frame)[0]

    __call__ = handle_frame


class _Handler(socketserver.BaseRequestHandler):
    def handle(self):
        endpoint: AuthEndpoint = self.server.endpoint
        sock = self.request
        sock.settimeout(self.server.read_timeout)
        reader = sock.makefile("rb")
        try:
            try:
                frame = read_frame(reader.read)
            except DecodeError as exc:
                sock.sendall(endpoint.reject(exc.reason))
                return
            reply, accepted = endpoint.process(frame)
            sock.sendall(reply)
            if accepted:
                # optional confirmation that the client accepted our token
                try:
                    _, notice = decode_message(read_frame(reader.read))
                    if isinstance(notice, AcceptNotice):
                        endpoint._count("mutual_ok")
                except (ConnectionClosed, DecodeError, OSError):
                    pass
        except ConnectionClosed:
            pass
        except OSError as exc:
            log.debug("session from %s ended: %s", self.client_address, exc)
        except Exception:
            log.exception("session from %s crashed", self.client_address)
            endpoint._count("crash")
        finally:
            reader.close()


class _Server(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True


class ServiceHandle:
    def __init__(self, server: _Server, thread: threading.Thread):
        self._server = server
        self._thread = thread

    @property
    def address(self) -> tuple[str, int]:
        return self._server.server_address[:2]

    @property
    def endpoint(self) -> AuthEndpoint:
        return self._server.endpoint

    def alive(self) -> bool:
        return self._thread.is_alive()

    def close(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        self._thread.join()

    def wait(self) -> None:
        self._thread.join()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def serve(params: SystemParams, scheme: Scheme, policy: ServerPolicy,
          address: tuple[str, int] = ("127.0.0.1", 0),
          read_timeout: float = DEFAULT_TIMEOUT) -> ServiceHandle:
    """Start a threaded TCP verifier. Bind errors propagate to the caller."""
    server = _Server(address, _Handler)
    server.endpoint = AuthEndpoint(params, scheme, policy)
    server.read_timeout = read_timeout
    thread = threading.Thread(target=server.serve_forever, name="tspa-serve", daemon=True)
    thread.start()
    return ServiceHandle(server, thread)


@dataclass
class SessionOutcome:
    status: str  # server_authenticated | rejected | server_auth_failed
    reason: Reason | None = None
    login: object = None
    response: ServerResponse | None = None
    check: ServerAuthResult | None = None

    @property
    def ok(self) -> bool:
        return self.status == "server_authenticated"


def build_login(card: CardData, pw: str, scheme: Scheme, t: int, rng: random.Random):
    login = shen_login if scheme is Scheme.SHEN else improved_login
    return login(card, pw, draw_r(rng, card.n), t)


def authenticate(card: CardData, pw: str, scheme: Scheme, exchange: Callable[[bytes], bytes],
                 clock: ClockPolicy, rng: random.Random) -> SessionOutcome:
    """Run the client half of one session over ``exchange`` (frame in, reply out)."""
    msg = build_login(card, pw, scheme, clock.now(), rng)
    reply = exchange(encode_message(msg))
    try:
        _, answer = decode_message(reply)
    except DecodeError as exc:
        return SessionOutcome("server_auth_failed", exc.reason, msg)
    if isinstance(answer, RejectNotice):
        return SessionOutcome("rejected", answer.reason, msg)
    if not isinstance(answer, ServerResponse):
        return SessionOutcome("server_auth_failed", Reason.UNEXPECTED_MESSAGE, msg)
    check = verify_server_response(card, answer, clock.now(), clock)
    status = "server_authenticated" if check.ok else "server_auth_failed"
    return SessionOutcome(status, check.reason, msg, answer, check)


def client_session(card: CardData, pw: str, address: tuple[str, int], scheme: Scheme,
                   clock: ClockPolicy | None = None, rng: random.Random | None = None,
                   timeout: float = DEFAULT_TIMEOUT) -> SessionOutcome:
    """Log in over TCP. Connection problems raise ``OSError``/``TimeoutError``."""
    clock = clock or ClockPolicy()
    rng = rng or random.SystemRandom()
    with socket.create_connection(address, timeout=timeout) as sock:
        sock.settimeout(timeout)
        reader = sock.makefile("rb")

        def exchange(frame: bytes) -> bytes:
            sock.sendall(frame)
            try:
                return read_frame(reader.read)
            except ConnectionClosed:
                raise ConnectionError("server closed the connection") from None
            except DecodeError:
                return b""

        outcome = authenticate(card, pw, scheme, exchange, clock, rng)
        if outcome.ok:
            try:
                sock.sendall(encode_message(AcceptNotice(clock.now()), scheme))
            except OSError:
                pass
        reader.close()
    return outcome
