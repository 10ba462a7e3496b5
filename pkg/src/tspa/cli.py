"""Command line entry point.

Exit codes: 0 ok, 1 local error (files, bad state), 2 usage, 3 rejected by a
protocol party, 4 attack search exhausted, 5 network failure, 6 the server
failed mutual authentication.
"""

from __future__ import annotations

import argparse
import getpass
import os
import random
import sys
from pathlib import Path

from . import lab
from .adversary import ATTACKS
from .codec import ClockPolicy, OneWayConfig
from .messages import Scheme
from .registration import (KIC, DuplicateId, IdFormatRejected, IdPolicy, OldPasswordMismatch,
                           RegistrationError)
from .transport import files
from .transport.service import client_session, default_policy, parse_addr, serve

EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_REJECTED, EXIT_EXHAUSTED, EXIT_NETWORK, EXIT_SERVER_AUTH = range(7)


def _toy_bound(text: str) -> int:
    value = int(text, 0)
    if not 2 <= value <= 2**32:
        raise argparse.ArgumentTypeError("toy bound must lie in [2, 2**32]")
    return value


def _positive(text: str) -> int:
    value = int(text, 0)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _default_key_file() -> str:
    return os.environ.get("TSPA_KEY_FILE", "tspa.key")


def _password(args, attr: str = "password", prompt: str = "Password: ") -> str:
    value = getattr(args, attr, None)
    return value if value is not None else getpass.getpass(prompt)


def _card_path(args) -> Path:
    return Path(args.card_file or f"{args.identity}.card")


def _lab_config(args) -> lab.LabConfig:
    return lab.LabConfig(bits=args.bits, toy_bound=args.toy_f, permissive=args.permissive_kic,
                         delta_t=args.delta_t, seed=args.seed)


def cmd_kic_setup(args) -> int:
    f_config = OneWayConfig.toy(args.toy_f) if args.toy_f else OneWayConfig()
    policy = IdPolicy.permissive() if args.permissive_kic else IdPolicy()
    rng = random.Random(args.seed) if args.seed is not None else random.SystemRandom()
    kic = KIC.setup(args.bits, rng, args.e, f_config, policy)
    files.save_kic(kic, args.key_file)
    pub = kic.public_info()
    print(f"wrote {args.key_file}: n={pub['n']:#x} e={pub['e']} g={pub['g']}")
    return EXIT_OK


def cmd_kic_register(args) -> int:
    kic = files.load_kic(args.key_file)
    card = kic.register(args.identity, _password(args))
    files.save_kic(kic, args.key_file)
    files.save_card(card, _card_path(args))
    print(f"registered {args.identity}: id={card.id:#x} card={_card_path(args)}")
    return EXIT_OK


def cmd_kic_renew(args) -> int:
    kic = files.load_kic(args.key_file)
    card = files.load_card(_card_path(args))
    if card.identity != args.identity:
        print(f"card belongs to {card.identity!r}, not {args.identity!r}", file=sys.stderr)
        return EXIT_ERROR
    new_pw = _password(args, "new_password", "New password: ")
    renewed = kic.renew_password(card, _password(args), new_pw)
    files.save_card(renewed, _card_path(args))
    print(f"renewed password for {args.identity}")
    return EXIT_OK


def cmd_serve(args) -> int:
    kic = files.load_kic(args.key_file)
    scheme = Scheme.parse(args.scheme)
    policy = default_policy(scheme, ClockPolicy(args.delta_t), kic.id_policy, args.replay_cache)
    handle = serve(kic.params, scheme, policy, parse_addr(args.addr), args.timeout)
    host, port = handle.address
    print(f"serving {scheme.label} verifier on {host}:{port}", flush=True)
    try:
        handle.wait()
    except KeyboardInterrupt:
        handle.close()
    return EXIT_OK


def cmd_login(args) -> int:
    card = files.load_card(_card_path(args))
    scheme = Scheme.parse(args.scheme)
    try:
        outcome = client_session(card, _password(args), parse_addr(args.addr), scheme,
                                 ClockPolicy(args.delta_t), timeout=args.timeout)
    except OSError as exc:
        print(f"network error: {exc}", file=sys.stderr)
        return EXIT_NETWORK
    reason = outcome.reason.label if outcome.reason else "-"
    print(f"status={outcome.status} reason={reason}")
    if outcome.status == "rejected":
        return EXIT_REJECTED
    if outcome.status == "server_auth_failed":
        return EXIT_SERVER_AUTH
    return EXIT_OK


def _write_reports(path: str | None, reports) -> None:
    if path:
        with open(path, "a") as fh:
            for rep in reports:
                fh.write(rep.to_line() + "\n")


def cmd_attack(args) -> int:
    name = args.name.replace("-", "_")
    report = lab.run_attack(_lab_config(args), name, Scheme.parse(args.scheme),
                            white_box=not args.black_box)
    print(report.to_line())
    _write_reports(args.report_file, [report])
    return {"accepted": EXIT_OK, "search_exhausted": EXIT_EXHAUSTED}.get(report.outcome,
                                                                        EXIT_REJECTED)


def cmd_matrix(args) -> int:
    results = lab.run_matrix(_lab_config(args))
    for rep in results.values():
        print(rep.to_line())
    _write_reports(args.report_file, results.values())
    print()
    print(lab.format_matrix(results))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tspa", description="Timestamp smart-card authentication lab")
    sub = parser.add_subparsers(dest="command", required=True)

    def key_file(p):
        p.add_argument("--key-file", default=_default_key_file())

    def lab_flags(p):
        p.add_argument("--toy-f", type=_toy_bound, default=None, metavar="B",
                       help="small-range one-way function with outputs in [1, B]")
        p.add_argument("--permissive-kic", action="store_true",
                       help="KIC accepts any ID in [2, n-2] instead of tagged IDs")
        p.add_argument("--seed", type=int, default=1)
        p.add_argument("--bits", type=_positive, default=64)
        p.add_argument("--delta-t", type=_positive, default=60)
        p.add_argument("--report-file", default=None)

    def password(p, *names):
        for name in names:
            p.add_argument(f"--{name}", default=None,
                           help="insecure, for scripted use; prompts when omitted")

    kic = sub.add_parser("kic", help="key information center").add_subparsers(
        dest="kic_command", required=True)
    p = kic.add_parser("setup")
    key_file(p)
    p.add_argument("--bits", type=_positive, default=512)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--e", type=int, default=None, help="public exponent (default: smallest usable prime)")
    p.add_argument("--toy-f", type=_toy_bound, default=None, metavar="B")
    p.add_argument("--permissive-kic", action="store_true")
    p.set_defaults(func=cmd_kic_setup)

    p = kic.add_parser("register")
    p.add_argument("identity")
    key_file(p)
    p.add_argument("--card-file", default=None)
    password(p, "password")
    p.set_defaults(func=cmd_kic_register)

    p = kic.add_parser("renew")
    p.add_argument("identity")
    key_file(p)
    p.add_argument("--card-file", default=None)
    password(p, "password", "new-password")
    p.set_defaults(func=cmd_kic_renew)

    p = sub.add_parser("serve", help="run a verifier on TCP")
    key_file(p)
    p.add_argument("--scheme", choices=["shen", "improved"], default="improved")
    p.add_argument("--addr", default=None, help="host:port (default $TSPA_ADDR)")
    p.add_argument("--delta-t", type=_positive, default=60)
    p.add_argument("--timeout", type=float, default=10.0)
    cache = p.add_mutually_exclusive_group()
    cache.add_argument("--replay-cache", dest="replay_cache", action="store_true", default=None)
    cache.add_argument("--no-replay-cache", dest="replay_cache", action="store_false")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("login", help="authenticate against a running verifier")
    p.add_argument("identity")
    p.add_argument("--card-file", default=None)
    p.add_argument("--scheme", choices=["shen", "improved"], default="improved")
    p.add_argument("--addr", default=None)
    p.add_argument("--delta-t", type=_positive, default=60)
    p.add_argument("--timeout", type=float, default=10.0)
    password(p, "password")
    p.set_defaults(func=cmd_login)

    p = sub.add_parser("attack", help="run one forgery attack in a fresh lab")
    p.add_argument("name", choices=[a.replace("_", "-") for a in ATTACKS])
    p.add_argument("--scheme", choices=["shen", "improved"], required=True)
    p.add_argument("--black-box", action="store_true",
                   help="unity: invert a mod n as literally described")
    lab_flags(p)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("matrix", help="all attacks against both schemes")
    lab_flags(p)
    p.set_defaults(func=cmd_matrix)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (IdFormatRejected, DuplicateId, OldPasswordMismatch) as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    except (RegistrationError, files.FileFormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
