"""End-to-end acceptance checks, one test per criterion.

Each test logs a PASS/FAIL line through the ``record`` fixture; the lines are
printed together at the end of the pytest run.
"""

import math
import random
import socket
import time
from pathlib import Path

import pytest

from tspa.adversary import euclid_forgery
from tspa.codec import ClockPolicy, ManualClock, password_to_int
from tspa.improved import improved_login, recover_x
from tspa.lab import (EXPECTED_MATRIX, LabConfig, format_matrix, matrix_table,
                      measure_unity_blackbox, run_matrix)
from tspa.messages import Reason, RejectNotice, Scheme, ServerResponse
from tspa.numtheory import gen_system_params, mod_pow
from tspa.registration import KIC, IdPolicy
from tspa.shen import draw_r, verify_server_response
from tspa.transport.service import AuthEndpoint, build_login, client_session, default_policy, serve
from tspa.transport.wire import DecodeError, decode_message, encode_message

pytestmark = pytest.mark.acceptance

T0 = 1_700_000_000
REPORTS = Path(__file__).resolve().parent.parent / "reports"


def test_c01_honest_completeness(record):
    start = time.perf_counter()
    rng = random.Random(2024)
    ok = total = 0
    for bits in (16, 64, 128, 512):
        params = gen_system_params(bits, random.Random(bits))
        kic = KIC(params, IdPolicy() if bits >= 64 else IdPolicy.permissive())
        for scheme in Scheme:
            clock = ClockPolicy(60, 5, ManualClock(T0))
            endpoint = AuthEndpoint(params, scheme, default_policy(scheme, clock, kic.id_policy))
            for i in range(25):
                pw = f"pw-{rng.getrandbits(40)}"
                card = kic.register(f"{scheme.label}-{bits}-{i}", pw)
                reply, accepted = endpoint.process(
                    encode_message(build_login(card, pw, scheme, clock.now(), rng)))
                _, resp = decode_message(reply)
                total += 1
                ok += accepted and verify_server_response(card, resp, clock.now(), clock).ok
                clock.clock.advance(1)
    elapsed = time.perf_counter() - start
    passed = record("1 honest-run completeness", ok == total == 200 and elapsed < 60,
                    f"{ok}/{total} in {elapsed:.1f}s")
    assert passed


def test_c02_field_counts(record, kic128):
    card = kic128.register("count", "pw")
    shen = encode_message(build_login(card, "pw", Scheme.SHEN, T0, random.Random(0)))
    imp = encode_message(build_login(card, "pw", Scheme.IMPROVED, T0, random.Random(0)))
    passed = record("2 login field_count bytes", (shen[7], imp[7]) == (8, 7),
                    f"shen={shen[7]} improved={imp[7]}")
    assert passed


def test_c03_xor_recovery(record, kic128):
    rng = random.Random(3)
    exact = 0
    for i in range(1000):
        pw = f"pw{i}"
        card = kic128.register(f"xor{i}", pw)
        r = draw_r(rng, card.n)
        m = improved_login(card, pw, r, T0 + i)
        x = mod_pow(card.g, r * password_to_int(pw, card.n), card.n)
        exact += recover_x(m.z, card.cid, m.y, card.f_config, card.n) == x
    passed = record("3 XOR recovery identity", exact == 1000, f"{exact}/1000 exact")
    assert passed


def test_c04_attack_matrix(record):
    start = time.perf_counter()
    results = run_matrix(LabConfig(bits=64, toy_bound=16, permissive=True, delta_t=60, seed=1))
    elapsed = time.perf_counter() - start
    REPORTS.mkdir(exist_ok=True)
    (REPORTS / "attack_matrix.txt").write_text(
        "\n".join(rep.to_line() for rep in results.values()) + "\n\n" + format_matrix(results) + "\n")
    table = matrix_table(results)
    passed = record("4 attack matrix", table == EXPECTED_MATRIX and elapsed < 120,
                    f"{sum(table[k] == v for k, v in EXPECTED_MATRIX.items())}/8 cells in {elapsed:.2f}s")
    assert passed


def test_c05_micro_instance(record):
    n, e, id_, a = 77, 7, 8, 5
    _, _, x_f, y_f = euclid_forgery(id_, e, a, n)
    lhs, rhs = pow(y_f, e, n), id_ * pow(x_f, a, n) % n
    passed = record("5 worked micro-instance", (x_f, y_f, lhs, rhs) == (15, 50, 8, 8),
                    f"X_f={x_f} Y_f={y_f} Y^e={lhs} ID*X^a={rhs}")
    assert passed


def test_c06_replay(record, params128):
    kic = KIC(params128, IdPolicy())
    rng = random.Random(6)
    stale = {s: 0 for s in Scheme}
    replayed = {s: 0 for s in Scheme}
    for scheme in Scheme:
        for cache in (False, True):
            clock = ClockPolicy(60, 5, ManualClock(T0))
            endpoint = AuthEndpoint(params128, scheme,
                                    default_policy(scheme, clock, kic.id_policy, cache))
            for i in range(100):
                card = kic.register(f"rp-{scheme.label}-{cache}-{i}", "pw")
                frame = encode_message(build_login(card, "pw", scheme, clock.now(), rng))
                assert endpoint.process(frame)[1]
                if cache:
                    _, reply = decode_message(endpoint.process(frame)[0])
                    replayed[scheme] += isinstance(reply, RejectNotice) and reply.reason is Reason.REPLAYED
                clock.clock.advance(61)
                _, reply = decode_message(endpoint.process(frame)[0])
                if not cache:
                    stale[scheme] += isinstance(reply, RejectNotice) and reply.reason is Reason.STALE_TIMESTAMP
    passed = record("6 replay rejection",
                    all(v == 100 for v in (*stale.values(), *replayed.values())),
                    "stale " + " ".join(f"{s.label}={stale[s]}/100" for s in Scheme)
                    + "; replayed " + " ".join(f"{s.label}={replayed[s]}/100" for s in Scheme))
    assert passed


def test_c07_server_token_soundness(record, kic128):
    card = kic128.register("mutual", "pw")
    clock = ClockPolicy(60, 5, ManualClock(T0))
    rng = random.Random(7)
    passes = sum(verify_server_response(card, ServerResponse(rng.randrange(card.n), T0), T0, clock).ok
                 for _ in range(10_000))
    passed = record("7 random R rejected", passes == 0, f"{passes}/10000 passed")
    assert passed


def _mutants(rng, seeds):
    for i in range(100_000):
        kind = i % 4
        if kind == 0:
            yield rng.randbytes(rng.randrange(0, 120))
        elif kind == 1:
            data = bytearray(rng.choice(seeds))
            for _ in range(rng.randint(1, 6)):
                data[rng.randrange(len(data))] = rng.randrange(256)
            yield bytes(data)
        elif kind == 2:
            data = rng.choice(seeds)
            cut = rng.randrange(len(data))
            yield data[:cut] + rng.randbytes(rng.randrange(0, 16))
        else:
            data = bytearray(rng.choice(seeds))
            pos = rng.randrange(len(data))
            yield bytes(data[:pos] + rng.randbytes(rng.randint(1, 8)) + data[pos:])


def test_c08_hostile_input(record, params128):
    kic = KIC(params128, IdPolicy())
    card = kic.register("fuzz", "pw")
    rng = random.Random(8)
    seeds = [encode_message(build_login(card, "pw", s, T0, rng)) for s in Scheme]
    seeds += [encode_message(ServerResponse(5, T0), Scheme.SHEN),
              encode_message(RejectNotice(Reason.REPLAYED), Scheme.IMPROVED)]
    clock = ClockPolicy(60, 5, ManualClock(T0))
    endpoint = AuthEndpoint(params128, Scheme.IMPROVED,
                            default_policy(Scheme.IMPROVED, clock, kic.id_policy))
    crashes = bad_replies = 0
    frames = list(_mutants(rng, seeds))
    for frame in frames:
        try:
            decode_message(frame)
        except DecodeError:
            pass
        except Exception:
            crashes += 1
        try:
            reply, accepted = endpoint.process(frame)
            _, msg = decode_message(reply)
            bad_replies += not (isinstance(msg, RejectNotice) or accepted)
        except Exception:
            crashes += 1
    with serve(params128, Scheme.IMPROVED, default_policy(Scheme.IMPROVED, id_policy=kic.id_policy),
               read_timeout=1) as h:
        for frame in frames[:300]:
            with socket.create_connection(h.address, timeout=5) as sock:
                sock.sendall(frame)
                sock.shutdown(socket.SHUT_WR)
                sock.recv(65536)
        live = h.alive() and client_session(card, "pw", h.address, Scheme.IMPROVED).ok
        crashes += h.endpoint.stats["crash"]
    passed = record("8 hostile-input robustness", crashes == 0 and bad_replies == 0 and live,
                    f"{len(frames)} frames, crashes={crashes} bad_replies={bad_replies} live={live}")
    assert passed


def test_c09_rsa_round_trip(record):
    rng = random.Random(9)
    good = total = 0
    for bits in (16, 64, 128, 256, 512):
        for seed in range(4):
            p = gen_system_params(bits, random.Random(1000 * bits + seed))
            done = 0
            while done < 500:
                x = rng.randrange(1, p.n)
                if math.gcd(x, p.n) != 1:
                    continue
                done += 1
                total += 1
                good += mod_pow(mod_pow(x, p.e, p.n), p.d, p.n) == x
    passed = record("9 RSA round trip", good == total == 10_000, f"{good}/{total}")
    assert passed


def test_c10_unity_black_box_rate(record):
    trials = 200
    config = LabConfig(bits=128, toy_bound=None, permissive=True, seed=10)
    accepted, n = measure_unity_blackbox(config, trials)
    rate = accepted / n
    REPORTS.mkdir(exist_ok=True)
    (REPORTS / "unity_blackbox.txt").write_text(
        f"attack=unity mode=black-box scheme=shen bits=128 f=hash trials={n} "
        f"accepted={accepted} rate={rate:.4f}\n")
    record("10 unity black-box rate (reported)", True, f"{accepted}/{n} accepted, rate={rate:.4f}")
