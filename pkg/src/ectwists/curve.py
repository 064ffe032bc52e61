"""Elliptic curves over Q: Weierstrass data, L-series coefficients, real period."""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path

import numba
import numpy as np
from sympy import factorint, primerange

logger = logging.getLogger(__name__)

MAX_COUNT_PRIME = 10**7

CATALOGUE_FIELDS = ("label", "a1", "a2", "a3", "a4", "a6", "conductor", "root_number")


class CurveError(ValueError):
    pass


@dataclass(frozen=True)
class CurveData:
    label: str
    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    conductor: int
    root_number: int | None = None

    def __post_init__(self):
        if self.discriminant == 0:
            raise CurveError(f"{self.label}: singular Weierstrass model")
        if self.conductor < 1:
            raise CurveError(f"{self.label}: conductor must be positive")
        if self.root_number not in (None, 1, -1):
            raise CurveError(f"{self.label}: root number must be +1 or -1")

    @property
    def ainvs(self) -> tuple[int, int, int, int, int]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def b_invariants(self) -> tuple[int, int, int, int]:
        a1, a2, a3, a4, a6 = self.ainvs
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    @property
    def discriminant(self) -> int:
        b2, b4, b6, b8 = self.b_invariants
        return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    @cached_property
    def real_period(self) -> float:
        return real_period(self)

    @cached_property
    def sign(self) -> int:
        """Root number, from the catalogue or detected when absent."""
        if self.root_number is not None:
            return self.root_number
        return detect_root_number(self)


@dataclass(frozen=True)
class CoefficientTable:
    """Dirichlet coefficients a_1..a_{n_max}; ``coeffs[n]`` is a_n, ``coeffs[0]`` is 0."""

    n_max: int
    coeffs: np.ndarray = field(repr=False)

    @property
    def values(self) -> np.ndarray:
        return self.coeffs[1:]

    def __getitem__(self, n: int) -> int:
        if not 1 <= n <= self.n_max:
            raise IndexError(n)
        return int(self.coeffs[n])

    def __len__(self) -> int:
        return self.n_max


# -- catalogue ------------------------------------------------------------


def parse_catalogue(text: str) -> dict[str, CurveData]:
    """Parse ``key=value`` records, one curve per line; ``#`` starts a comment."""
    curves = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        record = {}
        for token in line.split():
            key, sep, value = token.partition("=")
            if not sep:
                raise CurveError(f"line {lineno}: expected key=value, got {token!r}")
            if key not in CATALOGUE_FIELDS:
                raise CurveError(f"line {lineno}: unknown field {key!r}")
            if key in record:
                raise CurveError(f"line {lineno}: duplicate field {key!r}")
            record[key] = value
        missing = [k for k in CATALOGUE_FIELDS[:-1] if k not in record]
        if missing:
            raise CurveError(f"line {lineno}: missing fields {missing}")
        try:
            kwargs = {k: int(v) for k, v in record.items() if k != "label"}
        except ValueError as exc:
            raise CurveError(f"line {lineno}: {exc}") from None
        curve = CurveData(label=record["label"], **kwargs)
        if curve.label in curves:
            raise CurveError(f"line {lineno}: duplicate label {curve.label!r}")
        curves[curve.label] = curve
    return curves


def load_catalogue(path: str | os.PathLike | None = None) -> dict[str, CurveData]:
    if path is None:
        text = resources.files("ectwists").joinpath("data/curves.txt").read_text()
    else:
        text = Path(path).read_text()
    return parse_catalogue(text)


def get_curve(label: str, path: str | os.PathLike | None = None) -> CurveData:
    curves = load_catalogue(path)
    try:
        return curves[label]
    except KeyError:
        raise CurveError(f"unknown curve {label!r}; known: {sorted(curves)}") from None


# -- point counting -------------------------------------------------------


@numba.njit(cache=True)
def _legendre_count(p, b2, b4, b6):
    # returns sum over x in F_p of legendre(4x^3 + b2 x^2 + 2 b4 x + b6)
    p = np.int64(p)
    chi = np.full(p, -1, np.int8)
    sq = np.int64(0)
    step = np.int64(1)
    for _ in range((p + 1) // 2):
        chi[sq] = 1
        sq += step
        if sq >= p:
            sq -= p
        step += 2
        if step >= p:
            step -= p
    chi[0] = 0
    # forward differences of the cubic; third difference is 24
    f = b6 % p
    d1 = (4 + b2 + 2 * b4) % p
    d2 = (24 + 2 * b2) % p
    d3 = 24 % p
    s = np.int64(0)
    for _ in range(p):
        s += chi[f]
        f += d1
        if f >= p:
            f -= p
        d1 += d2
        if d1 >= p:
            d1 -= p
        d2 += d3
        if d2 >= p:
            d2 -= p
    return s


def _brute_force_points(curve: CurveData, p: int, nonsingular_only: bool) -> int:
    """Projective point count of the reduction mod p, O(p^2)."""
    a1, a2, a3, a4, a6 = (a % p for a in curve.ainvs)
    count = 1  # point at infinity, always nonsingular
    for x in range(p):
        for y in range(p):
            if (y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6) % p:
                continue
            if nonsingular_only:
                fx = (a1 * y - 3 * x * x - 2 * a2 * x - a4) % p
                fy = (2 * y + a1 * x + a3) % p
                if fx == 0 and fy == 0:
                    continue
            count += 1
    return count


def ap(curve: CurveData, p: int, bound: int = MAX_COUNT_PRIME) -> int:
    """Trace of Frobenius at p (or the bad-prime coefficient when p | N)."""
    if p > bound:
        raise CurveError("prime too large for naive counting")
    if curve.conductor % p == 0:
        return p - _brute_force_points(curve, p, nonsingular_only=True)
    if p == 2:
        return p + 1 - _brute_force_points(curve, p, nonsingular_only=False)
    b2, b4, b6, _ = curve.b_invariants
    return -int(_legendre_count(p, b2, b4, b6))


def _cache_dir() -> Path | None:
    root = os.environ.get("ECTWISTS_CACHE")
    if root == "":
        return None
    path = Path(root) if root else Path.home() / ".cache" / "ectwists"
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError:
        return None
    return path


def _cache_key(curve: CurveData) -> str:
    return f"{curve.label}_" + "_".join(str(a) for a in curve.ainvs) + f"_N{curve.conductor}"


def _load_cached(curve: CurveData, n_max: int) -> np.ndarray | None:
    cache = _cache_dir()
    if cache is None:
        return None
    best = None
    for path in cache.glob(_cache_key(curve) + "_*.npy"):
        try:
            size = int(path.stem.rsplit("_", 1)[1])
        except ValueError:
            continue
        if size >= n_max and (best is None or size < best[0]):
            best = (size, path)
    if best is None:
        return None
    try:
        data = np.load(best[1])
    except (OSError, ValueError):
        return None
    if len(data) != best[0] + 1:
        return None
    return data[: n_max + 1].copy()


def _store_cached(curve: CurveData, coeffs: np.ndarray) -> None:
    cache = _cache_dir()
    if cache is None:
        return
    n_max = len(coeffs) - 1
    target = cache / f"{_cache_key(curve)}_{n_max}.npy"
    tmp = target.with_suffix(f".{os.getpid()}.tmp.npy")
    try:
        np.save(tmp, coeffs)
        os.replace(tmp, target)
    except OSError:
        logger.warning("could not write coefficient cache %s", target)


def an_table(curve: CurveData, n_max: int, use_cache: bool = True) -> CoefficientTable:
    """Coefficients a_1..a_{n_max} of L_E(s) from counted a_p and Hecke relations.

    Large tables are cached under ``$ECTWISTS_CACHE`` (default
    ``~/.cache/ectwists``); set the variable to the empty string to disable.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if use_cache and n_max >= 10**4:
        cached = _load_cached(curve, n_max)
        if cached is not None:
            return CoefficientTable(n_max, cached)

    coeffs = np.zeros(n_max + 1, dtype=np.int64)
    coeffs[1] = 1
    # prime-power values first, then fill multiplicatively via smallest-prime sieve
    for p in primerange(2, n_max + 1):
        a = ap(curve, p)
        bad = curve.conductor % p == 0
        prev, cur = 1, a
        q = p
        while q <= n_max:
            coeffs[q] = cur
            if bad:
                prev, cur = cur, cur * a
            else:
                prev, cur = cur, a * cur - p * prev
            q *= p
    spf = _smallest_prime_factor(n_max)
    for n in range(2, n_max + 1):
        p = spf[n]
        q = p
        m = n // p
        while m % p == 0:
            q *= p
            m //= p
        if m > 1:
            coeffs[n] = coeffs[q] * coeffs[m]
    if use_cache and n_max >= 10**4:
        _store_cached(curve, coeffs)
    return CoefficientTable(n_max, coeffs)


def _smallest_prime_factor(n: int) -> np.ndarray:
    spf = np.zeros(n + 1, dtype=np.int64)
    for p in range(2, math.isqrt(n) + 1):
        if spf[p] == 0:
            block = spf[p * p :: p]
            block[block == 0] = p
    rest = spf == 0
    spf[rest] = np.arange(n + 1)[rest]
    return spf


# -- real period ----------------------------------------------------------


def _agm(a: float, b: float, max_iter: int = 200, rtol: float = 1e-15) -> float:
    for _ in range(max_iter):
        if abs(a - b) <= rtol * abs(a):
            return (a + b) / 2
        a, b = (a + b) / 2, math.sqrt(a * b)
    raise RuntimeError("AGM did not converge")


def _cubic_roots(curve: CurveData) -> np.ndarray:
    b2, b4, b6, _ = curve.b_invariants
    roots = np.roots([4.0, float(b2), 2.0 * b4, float(b6)])
    # one Newton polish per root for full double precision
    poly = np.polynomial.Polynomial([b6, 2.0 * b4, b2, 4.0])
    deriv = poly.deriv()
    return np.array([r - poly(r) / deriv(r) for r in roots])


def real_period(curve: CurveData, rtol: float = 1e-15) -> float:
    """Least positive real period, doubled when the real locus has two components."""
    roots = _cubic_roots(curve)
    b2 = curve.b_invariants[0]
    if curve.discriminant > 0:
        e1, e2, e3 = sorted(roots.real, reverse=True)
        omega = math.pi / _agm(math.sqrt(e1 - e3), math.sqrt(e1 - e2), rtol=rtol)
        return 2.0 * omega
    e1 = float(roots[np.argmin(np.abs(roots.imag))].real)
    a = 3.0 * e1 + b2 / 4.0
    b = math.sqrt(3.0 * e1 * e1 + b2 / 2.0 * e1 + curve.b_invariants[1] / 2.0)
    return 2.0 * math.pi / _agm(2.0 * math.sqrt(b), math.sqrt(2.0 * b + a), rtol=rtol)


def detect_root_number(curve: CurveData, eps: float = 1e-12) -> int:
    """Sign w for which the central value is independent of the AFE split."""
    from .lvalue import untwisted_central_value

    # both signs give identical sums only if sum2(A) == 0 for both splits
    verdict = []
    for w in (1, -1):
        v1 = untwisted_central_value(curve, w, split=1.0, eps=eps)
        v2 = untwisted_central_value(curve, w, split=1.3, eps=eps)
        verdict.append(abs(v1 - v2) < 10 * eps)
    if verdict[0] == verdict[1]:
        raise CurveError("indeterminate root number")
    return 1 if verdict[0] else -1


def bad_primes(curve: CurveData) -> list[int]:
    return sorted(factorint(curve.conductor))
