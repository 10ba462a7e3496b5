"""Modular arithmetic and KIC parameter generation.

Everything here works on plain Python integers. Randomness is always passed
in as a ``random.Random``-compatible object so seeded runs are reproducible.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .codec import OneWayConfig

MR_ROUNDS = 40

_SMALL_PRIMES = [p for p in range(3, 2000) if all(p % d for d in range(2, math.isqrt(p) + 1))]


class NumberTheoryError(ValueError):
    pass


class NotInvertible(NumberTheoryError):
    def __init__(self, a: int, m: int, gcd: int):
        super().__init__(f"{a} is not invertible mod {m} (gcd={gcd})")
        self.a = a
        self.m = m
        self.gcd = gcd


class GenerationTimeout(NumberTheoryError):
    pass


class ParamError(NumberTheoryError):
    pass


def mod_pow(base: int, exp: int, m: int) -> int:
    """Square-and-multiply ``base**exp % m`` for a non-negative exponent."""
    if m < 2:
        raise NumberTheoryError(f"modulus must be >= 2, got {m}")
    if exp < 0:
        raise NumberTheoryError("negative exponent; invert the base first")
    result = 1
    base %= m
    while exp:
        if exp & 1:
            result = result * base % m
        base = base * base % m
        exp >>= 1
    return result


def ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, u, v)`` with ``a*u + b*v == g == gcd(a, b)``.

    Coefficients are normalised so that ``0 <= u < b // g`` whenever ``b > 0``;
    this pins down a unique answer, e.g. ``ext_gcd(7, 5) == (1, 3, -4)``.
    """
    if a < 0 or b < 0:
        raise NumberTheoryError("ext_gcd takes non-negative arguments")
    if a == 0 and b == 0:
        raise NumberTheoryError("gcd(0, 0) is undefined")
    old_r, r = a, b
    old_u, u = 1, 0
    while r:
        quot = old_r // r
        old_r, r = r, old_r - quot * r
        old_u, u = u, old_u - quot * u
    g = old_r
    if b == 0:
        return g, old_u, 0
    u = old_u % (b // g)
    v = (g - a * u) // b
    return g, u, v


def mod_inverse(a: int, m: int) -> int:
    if m < 2:
        raise NumberTheoryError(f"modulus must be >= 2, got {m}")
    g, u, _ = ext_gcd(a % m, m)
    if g != 1:
        raise NotInvertible(a, m, g)
    return u % m


def is_probable_prime(n: int, rng: random.Random | None = None, rounds: int = MR_ROUNDS) -> bool:
    """Miller-Rabin with ``rounds`` random bases (small-prime trial division first)."""
    if n < 2:
        return False
    if n in (2, 3):
        return True
    if n % 2 == 0:
        return False
    for p in _SMALL_PRIMES:
        if n == p:
            return True
        if n % p == 0:
            return False
    if n < _SMALL_PRIMES[-1] ** 2:
        return True
    rng = rng or random.SystemRandom()
    s, t = 0, n - 1
    while t % 2 == 0:
        s += 1
        t //= 2
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = pow(a, t, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def gen_safe_prime(bits: int, rng: random.Random, rounds: int = MR_ROUNDS,
                   max_attempts: int | None = None) -> int:
    """Return a ``bits``-bit prime ``p`` such that ``(p - 1) // 2`` is also prime."""
    if bits < 8:
        raise NumberTheoryError("safe primes need at least 8 bits")
    attempts = 0
    while max_attempts is None or attempts < max_attempts:
        attempts += 1
        # q has bits-1 bits, so p = 2q + 1 has exactly `bits` bits
        q = rng.getrandbits(bits - 1) | (1 << (bits - 2)) | 1
        p = 2 * q + 1
        # sieve both q and 2q+1 before any modular exponentiation
        if any((q % s == 0 and q != s) or (p % s == 0 and p != s) for s in _SMALL_PRIMES):
            continue
        if pow(2, p - 1, p) != 1:
            continue
        if is_probable_prime(q, rng, rounds) and is_probable_prime(p, rng, rounds):
            return p
    raise GenerationTimeout(f"no {bits}-bit safe prime after {attempts} attempts")


def _prime_factors(m: int) -> list[int]:
    """Distinct prime factors of ``m``; cheap for ``2 * prime`` and small ``m``."""
    factors = []
    while m % 2 == 0:
        if not factors:
            factors.append(2)
        m //= 2
    if m == 1:
        return factors
    if is_probable_prime(m, random.Random(m)):
        return factors + [m]
    f = 3
    while f * f <= m:
        if m % f == 0:
            factors.append(f)
            while m % f == 0:
                m //= f
        f += 2
        if f > 1 << 24:
            raise NumberTheoryError("group order too hard to factor; use safe primes")
    if m > 1:
        factors.append(m)
    return factors


def is_primitive_root(g: int, p: int, factors: list[int] | None = None) -> bool:
    if g % p == 0:
        return False
    factors = factors if factors is not None else _prime_factors(p - 1)
    return all(pow(g, (p - 1) // r, p) != 1 for r in factors)


def find_primitive_root_both(p: int, q: int) -> int:
    """Smallest ``g >= 2`` that generates both ``GF(p)*`` and ``GF(q)*``."""
    if p == q:
        raise NumberTheoryError("p and q must differ")
    fp, fq = _prime_factors(p - 1), _prime_factors(q - 1)
    for g in range(2, p * q):
        if is_primitive_root(g, p, fp) and is_primitive_root(g, q, fq):
            return g
    raise NumberTheoryError(f"no common primitive root below {p * q}")


def next_prime_coprime(start: int, phi: int) -> int:
    e = max(start, 3)
    while not (is_probable_prime(e, random.Random(e)) and math.gcd(e, phi) == 1):
        e += 1
    return e


@dataclass(frozen=True)
class PublicParams:
    n: int
    e: int
    g: int
    f_config: OneWayConfig = field(default_factory=OneWayConfig)

    @property
    def modulus_width(self) -> int:
        return (self.n.bit_length() + 7) // 8


@dataclass(frozen=True)
class SystemParams:
    """KIC key material. ``p``, ``q`` and ``d`` never leave the KIC/server."""

    p: int
    q: int
    n: int
    e: int
    d: int
    g: int
    f_config: OneWayConfig = field(default_factory=OneWayConfig)

    @property
    def modulus_width(self) -> int:
        return (self.n.bit_length() + 7) // 8

    @property
    def phi(self) -> int:
        return (self.p - 1) * (self.q - 1)

    def public(self) -> PublicParams:
        return PublicParams(self.n, self.e, self.g, self.f_config)

    def check(self, rounds: int = MR_ROUNDS) -> None:
        """Raise ``ParamError`` unless every structural invariant holds."""
        rng = random.Random(self.n)
        if self.p == self.q:
            raise ParamError("p == q")
        for name, v in (("p", self.p), ("q", self.q), ("e", self.e)):
            if not is_probable_prime(v, rng, rounds):
                raise ParamError(f"{name} is not prime")
        if self.n != self.p * self.q:
            raise ParamError("n != p*q")
        if math.gcd(self.e, self.phi) != 1 or self.e * self.d % self.phi != 1:
            raise ParamError("e*d != 1 mod (p-1)(q-1)")
        if not (is_primitive_root(self.g, self.p) and is_primitive_root(self.g, self.q)):
            raise ParamError("g is not primitive in both GF(p) and GF(q)")


def params_from_primes(p: int, q: int, e: int | None = None,
                       f_config: OneWayConfig | None = None) -> SystemParams:
    """Build ``SystemParams`` from known primes (fixtures, key-file reloads)."""
    if p == q:
        raise ParamError("p and q must differ")
    phi = (p - 1) * (q - 1)
    if e is None:
        e = next_prime_coprime(3, phi)
    elif not is_probable_prime(e, random.Random(e)) or math.gcd(e, phi) != 1:
        raise ParamError(f"e={e} must be a prime coprime to (p-1)(q-1)={phi}")
    d = mod_inverse(e, phi)
    g = find_primitive_root_both(p, q)
    return SystemParams(p, q, p * q, e, d, g, f_config or OneWayConfig())


def gen_system_params(bits: int, rng: random.Random, e_choice: int | None = None,
                      f_config: OneWayConfig | None = None, rounds: int = MR_ROUNDS,
                      max_attempts: int | None = None) -> SystemParams:
    """Generate a ``bits``-bit modulus from two distinct safe primes.

    ``e_choice=None`` picks the smallest prime >= 3 coprime to (p-1)(q-1).
    """
    if bits < 16:
        raise ParamError("modulus must be at least 16 bits")
    pbits = bits // 2
    qbits = bits - pbits
    p = gen_safe_prime(pbits, rng, rounds, max_attempts)
    while True:
        q = gen_safe_prime(qbits, rng, rounds, max_attempts)
        if q != p and (p * q).bit_length() == bits:
            break
    phi = (p - 1) * (q - 1)
    if e_choice is not None and math.gcd(e_choice, phi) != 1:
        raise ParamError(f"e={e_choice} shares a factor with (p-1)(q-1)")
    return params_from_primes(p, q, e_choice, f_config)
