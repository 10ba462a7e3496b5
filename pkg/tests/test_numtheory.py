import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from tspa.numtheory import (GenerationTimeout, NotInvertible, NumberTheoryError, ParamError,
                            ext_gcd, find_primitive_root_both, gen_safe_prime,
                            gen_system_params, is_primitive_root, is_probable_prime,
                            mod_inverse, mod_pow, params_from_primes)


def trial_division_prime(n):
    return n >= 2 and all(n % d for d in range(2, math.isqrt(n) + 1))


def brute_pow(b, k, m):
    acc = 1
    for _ in range(k):
        acc = acc * b % m
    return acc % m


def brute_order(g, p):
    if g % p == 0:
        return None
    x, k = g % p, 1
    while x != 1:
        x, k = x * g % p, k + 1
    return k


def brute_common_root(p, q):
    for g in range(2, p * q):
        if brute_order(g, p) == p - 1 and brute_order(g, q) == q - 1:
            return g


SAFE_PRIMES_SMALL = [p for p in range(5, 2000)
                     if trial_division_prime(p) and trial_division_prime((p - 1) // 2)]


def test_mod_pow_examples():
    assert mod_pow(24, 0, 77) == 1
    assert brute_pow(8, 43, 77) == 50
    assert mod_pow(8, 43, 77) == 50
    for x in (0, 5, 76, 77, 1000):
        assert mod_pow(x, 1, 77) == x % 77


def test_mod_pow_rejects_small_modulus():
    with pytest.raises(NumberTheoryError):
        mod_pow(3, 4, 1)


@given(st.integers(0, 10**6), st.integers(0, 300), st.integers(2, 10**4))
def test_mod_pow_matches_repeated_multiplication(b, k, m):
    assert mod_pow(b, k, m) == brute_pow(b, k, m)


def test_mod_inverse_examples():
    assert [x for x in range(1, 77) if 8 * x % 77 == 1] == [29]
    assert mod_inverse(8, 77) == 29
    assert [x for x in range(1, 60) if 43 * x % 60 == 1] == [7]
    assert mod_inverse(43, 60) == 7
    assert mod_inverse(1, 77) == 1


def test_mod_inverse_not_invertible():
    with pytest.raises(NotInvertible) as info:
        mod_inverse(14, 77)
    assert info.value.gcd == 7


@given(st.integers(2, 10**12), st.integers(0, 10**12))
def test_mod_inverse_property(m, a):
    if math.gcd(a % m, m) != 1:
        with pytest.raises(NotInvertible):
            mod_inverse(a, m)
    else:
        inv = mod_inverse(a, m)
        assert 0 <= inv < m
        assert mod_pow(inv, 1, m) * a % m == 1 % m


def test_ext_gcd_examples():
    assert ext_gcd(9, 0) == (9, 1, 0)
    assert ext_gcd(7, 5) == (1, 3, -4)
    assert 7 * 3 + 5 * -4 == 1
    assert ext_gcd(6, 4) == (2, 1, -1)
    with pytest.raises(NumberTheoryError):
        ext_gcd(0, 0)


def test_ext_gcd_random_pairs():
    rng = random.Random(0)
    for _ in range(1000):
        a, b = rng.randrange(0, 10**18), rng.randrange(1, 10**18)
        g, u, v = ext_gcd(a, b)
        assert g == math.gcd(a, b)
        assert a * u + b * v == g


def test_is_probable_prime_agrees_with_trial_division():
    rng = random.Random(1)
    for n in list(range(0, 5000)) + [rng.randrange(10**6, 10**7) for _ in range(300)]:
        assert is_probable_prime(n, rng) == trial_division_prime(n), n


def test_miller_rabin_catches_carmichael_numbers():
    for n in (561, 1105, 1729, 2465, 2821, 6601, 8911, 41041, 825265, 321197185):
        assert not is_probable_prime(n, random.Random(n))


def test_eight_bit_safe_primes():
    oracle = {p for p in range(128, 256)
              if trial_division_prime(p) and trial_division_prime((p - 1) // 2)}
    assert oracle == {167, 179, 227}
    for seed in range(20):
        p = gen_safe_prime(8, random.Random(seed))
        assert p in oracle


def test_safe_prime_is_deterministic_and_safe():
    a = gen_safe_prime(24, random.Random(5))
    assert a == gen_safe_prime(24, random.Random(5))
    assert a.bit_length() == 24
    assert trial_division_prime(a) and trial_division_prime((a - 1) // 2)


def test_safe_prime_attempt_cap():
    with pytest.raises(GenerationTimeout):
        gen_safe_prime(256, random.Random(0), max_attempts=1)


def test_primitive_root_examples():
    assert find_primitive_root_both(7, 11) == 17
    assert brute_common_root(7, 11) == 17
    assert find_primitive_root_both(3, 5) == 2
    assert brute_order(2, 3) == 2 and brute_order(2, 5) == 4
    with pytest.raises(NumberTheoryError):
        find_primitive_root_both(7, 7)


def test_primitive_root_matches_exhaustive_search():
    pairs = [(p, q) for p in SAFE_PRIMES_SMALL for q in SAFE_PRIMES_SMALL
             if p < q and p * q < 10**4]
    assert len(pairs) > 10
    for p, q in pairs:
        g = find_primitive_root_both(p, q)
        assert g == brute_common_root(p, q), (p, q)
        for r in {2, (p - 1) // 2}:
            assert pow(g, (p - 1) // r, p) != 1


def test_is_primitive_root_rejects_multiples_of_p():
    assert not is_primitive_root(7, 7)
    assert not is_primitive_root(14, 7)


def test_tiny_fixture_params(tiny_params):
    p = tiny_params
    assert (p.n, p.e, p.d, p.g) == (77, 7, 43, 17)
    assert p.e * p.d % p.phi == 1
    p.check()


def test_explicit_e_must_be_coprime():
    with pytest.raises(ParamError):
        params_from_primes(7, 11, 5)  # gcd(5, 60) = 5
    with pytest.raises(ParamError):
        params_from_primes(7, 11, 9)  # not prime


@pytest.mark.parametrize("bits", [16, 17, 64, 128, 256])
def test_generated_params_invariants(bits):
    p = gen_system_params(bits, random.Random(bits))
    p.check()
    assert p.n.bit_length() == bits
    assert p.p != p.q
    for prime in (p.p, p.q):
        assert is_probable_prime((prime - 1) // 2, random.Random(0))
    assert p.e == min(e for e in range(3, 200)
                      if trial_division_prime(e) and math.gcd(e, p.phi) == 1)


def test_generation_is_deterministic():
    assert gen_system_params(128, random.Random(7)) == gen_system_params(128, random.Random(7))


def test_generation_rejects_bad_explicit_e():
    p = gen_system_params(64, random.Random(3))
    blocker = (p.p - 1) // 2  # prime, and divides (p-1)(q-1)
    with pytest.raises(ParamError):
        gen_system_params(64, random.Random(3), e_choice=blocker)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from([16, 32, 64, 128]))
def test_rsa_round_trip(seed, bits):
    p = gen_system_params(bits, random.Random(bits))
    x = seed % (p.n - 1) + 1
    if math.gcd(x, p.n) == 1:
        assert mod_pow(mod_pow(x, p.e, p.n), p.d, p.n) == x
