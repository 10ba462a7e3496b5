import random

import pytest

from tspa.codec import password_to_int
from tspa.numtheory import mod_inverse, mod_pow
from tspa.registration import (KIC, DuplicateId, IdFormatRejected, IdNotCoprime, IdPolicy,
                               OldPasswordMismatch, UnknownId, check_id_format)

PW3 = "pw42"  # password_to_int(PW3, 77) == 3


def test_tiny_card(tiny_kic):
    assert password_to_int(PW3, 77) == 3
    card = tiny_kic.register(8, PW3)
    assert card.s == 50
    assert mod_pow(50, 7, 77) == 8
    assert card.h == mod_pow(17, 129, 77) == 13
    assert mod_pow(card.h, 7, 77) == mod_pow(17, 3, 77)
    assert card.cid == 37
    assert (card.n, card.e, card.g, card.id) == (77, 7, 17, 8)


def test_duplicate_id(tiny_kic):
    tiny_kic.register(8, "a")
    with pytest.raises(DuplicateId):
        tiny_kic.register(8, "b")


def test_id_sharing_factor_with_n(tiny_kic):
    with pytest.raises(IdNotCoprime):
        tiny_kic.register(14, "a")


def test_setup_is_deterministic_and_public_info_is_public():
    a = KIC.setup(96, random.Random(9))
    b = KIC.setup(96, random.Random(9))
    assert a.params == b.params
    assert set(a.public_info()) == {"n", "e", "g"}


def test_strict_policy_tags(kic128):
    n = kic128.params.n
    card = kic128.register("alice", "pw")
    assert check_id_format(kic128.id_policy, card.id, n)
    assert card.id >> (n.bit_length() - 17) == 0xA11C
    assert card.id < n
    assert card.identity == "alice"
    assert kic128.derive_id("alice") == card.id


def test_strict_policy_rejects_inverse_ids(kic128):
    n = kic128.params.n
    rng = random.Random(4)
    rejected = 0
    for i in range(1000):
        id_ = kic128.derive_id(f"user-{rng.getrandbits(64)}")
        assert check_id_format(kic128.id_policy, id_, n)
        rejected += not check_id_format(kic128.id_policy, mod_inverse(id_, n), n)
    assert rejected == 1000


def test_strict_kic_refuses_inverse_registration(kic128):
    card = kic128.register("alice", "pw")
    with pytest.raises(IdFormatRejected):
        kic128.register(mod_inverse(card.id, kic128.params.n), "x")


def test_permissive_policy_range():
    pol = IdPolicy.permissive()
    assert pol.check(8, 77)
    assert not pol.check(1, 77) and not pol.check(76, 77)


def test_strict_policy_needs_room(tiny_params):
    with pytest.raises(ValueError):
        KIC(tiny_params, IdPolicy())


def test_card_invariants(kic128, params128):
    rng = random.Random(2)
    for i in range(20):
        pw = f"pw{rng.random()}"
        card = kic128.register(f"u{i}", pw)
        assert mod_pow(card.s, params128.e, params128.n) == card.id
        assert mod_pow(card.h, params128.e, params128.n) == mod_pow(
            params128.g, password_to_int(pw, params128.n), params128.n)


def test_renewal_changes_only_h(tiny_kic):
    card = tiny_kic.register(8, "old")
    renewed = tiny_kic.renew_password(card, "old", "new")
    assert renewed.s == card.s == 50
    assert renewed.cid == card.cid
    assert renewed.h != card.h
    assert renewed.h == mod_pow(17, password_to_int("new", 77) * 43, 77)


def test_renewal_checks_old_password(kic128):
    card = kic128.register("bob", "old")
    with pytest.raises(OldPasswordMismatch):
        kic128.renew_password(card, "wrong", "new")


def test_renewal_unknown_id(kic128, tiny_kic):
    card = tiny_kic.register(8, "x")
    with pytest.raises(UnknownId):
        kic128.renew_password(card, "x", "y")
