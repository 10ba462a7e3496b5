import random

import pytest

from tspa.codec import ClockPolicy, ManualClock, OneWayConfig
from tspa.numtheory import gen_system_params, params_from_primes
from tspa.registration import KIC, IdPolicy

ACCEPTANCE = []


@pytest.fixture
def clock():
    return ManualClock(1_700_000_000)


@pytest.fixture
def clock_policy(clock):
    return ClockPolicy(60, 5, clock)


@pytest.fixture
def tiny_params():
    """p=7, q=11, e=7: n=77, d=43, g=17."""
    return params_from_primes(7, 11, 7, OneWayConfig.toy(8))


@pytest.fixture
def tiny_kic(tiny_params, clock):
    return KIC(tiny_params, IdPolicy.permissive(), clock=clock)


@pytest.fixture(scope="session")
def params128():
    return gen_system_params(128, random.Random(128))


@pytest.fixture
def kic128(params128, clock):
    return KIC(params128, IdPolicy(), clock=clock)


@pytest.fixture
def record():
    """Log one acceptance line; printed in the terminal summary."""
    def _record(criterion, passed, detail=""):
        ACCEPTANCE.append((criterion, passed, detail))
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {criterion}  {detail}")
