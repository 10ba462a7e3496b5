"""Self-contained attack laboratory.

A :class:`Lab` owns a KIC, one enrolled victim, a verifier for one scheme and
a tapped in-process channel between them. The victim logs in once, the tap
captures the login, and an attack runs from that capture alone.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import adversary
from .codec import ClockPolicy, ManualClock, OneWayConfig
from .messages import Scheme
from .registration import KIC, IdPolicy
from .transport.channel import ChannelSim, Tap
from .transport.service import AuthEndpoint, SessionOutcome, authenticate, default_policy

LAB_EPOCH = 1_700_000_000


@dataclass(frozen=True)
class LabConfig:
    bits: int = 64
    toy_bound: int | None = 16
    permissive: bool = True
    delta_t: int = 60
    skew: int = 5
    seed: int = 1
    delay: int = 1
    replay_cache: bool | None = None
    victim: str = "alice"
    password: str = "correct horse battery"

    @property
    def f_config(self) -> OneWayConfig:
        if self.toy_bound:
            return OneWayConfig.toy(self.toy_bound)
        return OneWayConfig()

    @property
    def id_policy(self) -> IdPolicy:
        return IdPolicy.permissive() if self.permissive else IdPolicy()


@dataclass
class Lab:
    config: LabConfig
    scheme: Scheme
    kic: KIC
    clock: ManualClock
    clock_policy: ClockPolicy
    endpoint: AuthEndpoint
    channel: ChannelSim
    tap: Tap
    rng: random.Random
    card: object = None
    sessions: list[SessionOutcome] = field(default_factory=list)

    @classmethod
    def build(cls, config: LabConfig, scheme: Scheme, kic: KIC | None = None) -> "Lab":
        clock = ManualClock(LAB_EPOCH)
        if kic is None:
            kic = KIC.setup(config.bits, random.Random(config.seed), f_config=config.f_config,
                            id_policy=config.id_policy, clock=clock)
        clock_policy = ClockPolicy(config.delta_t, config.skew, clock)
        policy = default_policy(scheme, clock_policy, kic.id_policy, config.replay_cache)
        endpoint = AuthEndpoint(kic.params, scheme, policy)
        channel = ChannelSim(endpoint, clock, delay=config.delay)
        tap = adversary.channel_tap(channel)
        rng = random.Random(f"{config.seed}:{scheme.label}")
        lab = cls(config, scheme, kic, clock, clock_policy, endpoint, channel, tap, rng)
        lab.card = kic.register(config.victim, config.password)
        return lab

    def honest_login(self, password: str | None = None) -> SessionOutcome:
        outcome = authenticate(self.card, password or self.config.password, self.scheme,
                               self.channel.send, self.clock_policy, self.rng)
        self.sessions.append(outcome)
        return outcome

    def intercepted(self) -> adversary.InterceptedMaterial:
        logins = list(adversary.intercepted_logins(self.tap, self.kic.params.f_config))
        if not logins:
            self.honest_login()
            logins = list(adversary.intercepted_logins(self.tap, self.kic.params.f_config))
        return logins[-1]

    def target(self) -> adversary.Target:
        return adversary.Target.via_channel(self.channel, self.scheme, self.config.delta_t,
                                            self.config.skew)

    def run_attack(self, name: str, white_box: bool = True,
                   budget: int = adversary.DEFAULT_BUDGET) -> adversary.AttackReport:
        mat = self.intercepted()
        self.clock.advance(self.config.delay)
        rng = random.Random(f"{self.config.seed}:{name}:{self.scheme.label}:{len(self.tap)}")
        target = self.target()
        if name == "euclid":
            return adversary.attack_euclid(mat, target, self.clock, rng, budget)
        if name == "scale":
            return adversary.attack_scale(mat, target, self.clock, rng, budget)
        if name == "inverse_id":
            return adversary.attack_inverse_id(mat, target, self.kic, self.clock, rng)
        if name == "unity":
            phi = self.kic.params.phi if white_box else None
            return adversary.attack_unity(mat, target, self.clock, rng, budget, phi)
        raise ValueError(f"unknown attack {name!r}")


def run_attack(config: LabConfig, name: str, scheme: Scheme,
               white_box: bool = True) -> adversary.AttackReport:
    return Lab.build(config, scheme).run_attack(name, white_box)


def run_matrix(config: LabConfig, attacks=adversary.ATTACKS
               ) -> dict[tuple[str, Scheme], adversary.AttackReport]:
    """Every attack against both verifiers, each in a fresh lab from the same seed."""
    results = {}
    for name in attacks:
        for scheme in Scheme:
            results[name, scheme] = run_attack(config, name, scheme, white_box=True)
    return results


EXPECTED_MATRIX = {(name, Scheme.SHEN): "ACCEPTED" for name in adversary.ATTACKS}
EXPECTED_MATRIX.update({(name, Scheme.IMPROVED): "REJECTED" for name in adversary.ATTACKS})


def cell(report: adversary.AttackReport) -> str:
    return {"accepted": "ACCEPTED", "rejected": "REJECTED",
            "search_exhausted": "EXHAUSTED", "aborted": "ABORTED"}[report.outcome]


def matrix_table(results) -> dict[tuple[str, Scheme], str]:
    return {key: cell(rep) for key, rep in results.items()}


def format_matrix(results) -> str:
    table = matrix_table(results)
    names = sorted({name for name, _ in table}, key=adversary.ATTACKS.index)
    lines = [f"{'attack':<12}{'shen':<12}{'improved':<12}"]
    for name in names:
        lines.append(f"{name:<12}{table[name, Scheme.SHEN]:<12}{table[name, Scheme.IMPROVED]:<12}")
    return "\n".join(lines)


def measure_unity_blackbox(config: LabConfig, trials: int) -> tuple[int, int]:
    """Accepted count for the literal (mod n) unity attack against the baseline verifier."""
    lab = Lab.build(config, Scheme.SHEN)
    accepted = 0
    for _ in range(trials):
        lab.honest_login()
        accepted += lab.run_attack("unity", white_box=False).accepted
        lab.clock.advance(config.delta_t + config.skew + 1)
    return accepted, trials
