"""Primitive Dirichlet characters of odd prime order k.

A character is stored by its local exponents: on each prime-power factor q
of the conductor we fix a generator g_q of (Z/qZ)^* and set
chi(g_q) = xi_k^{t_q}. Values are handled as exponents of xi_k = e^{2 pi i/k}
and converted to complex numbers only when summing.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np
from sympy import factorint, isprime, primerange


class CharacterError(ValueError):
    pass


@dataclass(frozen=True)
class ConductorFactorization:
    m: int
    factors: tuple[tuple[int, int], ...]

    @property
    def prime_powers(self) -> tuple[int, ...]:
        return tuple(p**e for p, e in self.factors)

    @property
    def rank(self) -> int:
        return len(self.factors)

    def __str__(self) -> str:
        return "*".join(f"{p}^{e}" for p, e in self.factors) or "1"


@dataclass(frozen=True)
class CharacterSpec:
    k: int
    modulus: ConductorFactorization
    exponents: tuple[int, ...]

    def __post_init__(self):
        if len(self.exponents) != self.modulus.rank:
            raise CharacterError("one exponent per prime-power factor required")
        if any(t % self.k == 0 for t in self.exponents):
            raise CharacterError("exponents must be nonzero mod k")

    @property
    def m(self) -> int:
        return self.modulus.m

    @property
    def label(self) -> str:
        ts = ",".join(str(t) for t in self.exponents)
        return f"m={self.m};factors={self.modulus};t={ts}"

    def __call__(self, a: int) -> complex:
        return eval_char(self, a)


@dataclass(frozen=True)
class ConjugacyClass:
    representative: CharacterSpec
    class_id: int

    @property
    def class_size(self) -> int:
        return self.representative.k - 1

    def members(self) -> list[CharacterSpec]:
        return [conjugate_char(self.representative, t) for t in range(1, self.class_size + 1)]


def _check_order(k: int) -> None:
    if k < 3 or not isprime(k):
        raise CharacterError(f"order must be an odd prime, got {k}")


def factor_conductor(k: int, m: int) -> ConductorFactorization:
    """Factor m and check it is the conductor of some order-k character."""
    _check_order(k)
    if m < 1:
        raise CharacterError("no primitive order-k character mod m")
    factors = sorted(factorint(m).items())
    for p, e in factors:
        ok = (p == k and e == 2) or (p % k == 1 and e == 1)
        if not ok:
            raise CharacterError(f"no primitive order-{k} character mod {m}")
    return ConductorFactorization(m, tuple(factors))


def trivial_character(k: int) -> CharacterSpec:
    """The principal character mod 1; used for untwisted L-values."""
    return CharacterSpec(k, ConductorFactorization(1, ()), ())


def enumerate_conductors(
    k: int, X: int, coprime_to: int = 1, include_k_squared: bool = True
) -> Iterator[ConductorFactorization]:
    """Admissible conductors m <= X with gcd(m, coprime_to) = 1, increasing."""
    _check_order(k)
    primes = [p for p in primerange(k + 1, X + 1) if p % k == 1 and coprime_to % p]
    seeds = [(1, ())]
    if include_k_squared and k * k <= X and coprime_to % k:
        seeds.append((k * k, ((k, 2),)))
    found = []

    def extend(m, factors, start):
        found.append((m, factors))
        for i in range(start, len(primes)):
            p = primes[i]
            if m * p > X:
                break
            extend(m * p, factors + ((p, 1),), i + 1)

    for m0, f0 in seeds:
        extend(m0, f0, 0)
    found.sort()
    for m, factors in found:
        if m > 1:
            yield ConductorFactorization(m, tuple(sorted(factors)))


# -- local discrete logarithms ---------------------------------------------


def _prime_divisors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


@lru_cache(maxsize=None)
def primitive_root(q: int) -> int:
    """Least generator of the cyclic group (Z/qZ)^*, q an odd prime power."""
    phi = q - q // _prime_divisors(q)[0]
    divisors = _prime_divisors(phi)
    for g in range(2, q):
        if math.gcd(g, q) != 1:
            continue
        if all(pow(g, phi // r, q) != 1 for r in divisors):
            return g
    raise CharacterError(f"(Z/{q}Z)^* is not cyclic")


@lru_cache(maxsize=4096)
def dlog_table(q: int) -> np.ndarray:
    """dlog_table(q)[a] = log of a base primitive_root(q), or -1 when gcd(a, q) > 1."""
    g = primitive_root(q)
    phi = q - q // _prime_divisors(q)[0]
    table = np.full(q, -1, dtype=np.int64)
    x = 1
    for i in range(phi):
        table[x] = i
        x = x * g % q
    table.flags.writeable = False
    return table


def discrete_log(a: int, g: int, q: int, order: int) -> int:
    """Baby-step giant-step solution of g^x = a (mod q), 0 <= x < order."""
    a %= q
    step = math.isqrt(order) + 1
    baby = {}
    x = 1
    for j in range(step):
        baby.setdefault(x, j)
        x = x * g % q
    giant = pow(g, -step, q)
    y = a
    for i in range(step + 1):
        if y in baby:
            return (i * step + baby[y]) % order
        y = y * giant % q
    raise CharacterError(f"{a} is not a power of {g} mod {q}")


@lru_cache(maxsize=256)
def _exponent_table_cached(spec: CharacterSpec) -> np.ndarray:
    k, m = spec.k, spec.m
    a = np.arange(m, dtype=np.int64)
    expo = np.zeros(m, dtype=np.int64)
    unit = np.ones(m, dtype=bool)
    for q, t in zip(spec.modulus.prime_powers, spec.exponents):
        local = dlog_table(q)[a % q]
        unit &= local >= 0
        expo += t * (local % k)
    expo %= k
    expo[~unit] = -1
    expo.flags.writeable = False
    return expo


def exponent_table(spec: CharacterSpec) -> np.ndarray:
    """e[a] with chi(a) = xi_k^{e[a]} for a in [0, m), and e[a] = -1 when gcd(a, m) > 1."""
    return _exponent_table_cached(spec)


def char_exponent(spec: CharacterSpec, a: int) -> int | None:
    """Exponent of xi_k giving chi(a), or None when chi(a) = 0."""
    if math.gcd(a, spec.m) != 1:
        return None
    total = 0
    for q, t in zip(spec.modulus.prime_powers, spec.exponents):
        phi = q - q // _prime_divisors(q)[0]
        total += t * discrete_log(a, primitive_root(q), q, phi)
    return total % spec.k


def eval_char(spec: CharacterSpec, a: int) -> complex:
    e = char_exponent(spec, a)
    if e is None:
        return 0j
    return root_of_unity(e, spec.k)


def root_of_unity(e: int, k: int) -> complex:
    return cmath.exp(2j * math.pi * (e % k) / k)


def conjugate_char(spec: CharacterSpec, t: int) -> CharacterSpec:
    """chi^sigma_t, sigma_t(xi_k) = xi_k^t."""
    if t % spec.k == 0:
        raise CharacterError("t must be a unit mod k")
    return CharacterSpec(spec.k, spec.modulus, tuple(e * t % spec.k for e in spec.exponents))


def gauss_sum(spec: CharacterSpec) -> complex:
    """tau(chi) = sum_a chi(a) e^{2 pi i a/m}."""
    k, m = spec.k, spec.m
    if m == 1:
        return 1.0 + 0j
    expo = exponent_table(spec)
    a = np.nonzero(expo >= 0)[0]
    # exact integer reduction of the combined phase e/k + a/m
    num = (expo[a] * m + a * k) % (k * m)
    return complex(np.exp(2j * np.pi * num / (k * m)).sum())


def enumerate_classes(k: int, m: int | ConductorFactorization) -> list[ConjugacyClass]:
    """One canonical representative per Galois class, first exponent fixed to 1."""
    fac = m if isinstance(m, ConductorFactorization) else factor_conductor(k, m)
    if isinstance(m, ConductorFactorization):
        factor_conductor(k, fac.m)
    if fac.m == 1:
        raise CharacterError(f"no primitive order-{k} character mod 1")
    rest = itertools.product(range(1, k), repeat=fac.rank - 1)
    return [
        ConjugacyClass(CharacterSpec(k, fac, (1,) + tail), i) for i, tail in enumerate(rest)
    ]


def canonical_representative(spec: CharacterSpec) -> CharacterSpec:
    """Member of the class of ``spec`` whose first exponent is 1."""
    inv = pow(spec.exponents[0], -1, spec.k)
    return conjugate_char(spec, inv)


def count_characters(k: int, X: int, include_k_squared: bool = True) -> tuple[int, float]:
    """N_k(X) (primitive order-k characters of conductor <= X) and N_k(X)/X."""
    total = sum(
        (k - 1) ** fac.rank for fac in enumerate_conductors(k, X, include_k_squared=include_k_squared)
    )
    return total, total / X
