"""Unitary random-matrix model for the distribution of |L_E(1, chi)|.

Keating-Snaith moments of |det(A - I)| over Haar-random U(N), the small-value
density that follows from their first pole at s = -1, and the heuristic
counts of vanishing twists obtained by summing per-conductor vanishing
probabilities.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dirichlet import enumerate_conductors

EULER_GAMMA = float(np.euler_gamma)

GROWTH_POWER = "power growth, exponent 1/2"
GROWTH_SUBPOLYNOMIAL = "unbounded, subpolynomial"
GROWTH_BOUNDED = "bounded"


class RmtError(ValueError):
    pass


# -- moments ---------------------------------------------------------------


def log_moment_product(s: float, N: int) -> float:
    if s <= -1:
        raise RmtError("outside analyticity domain")
    if N < 1:
        raise RmtError("N must be a positive integer")
    lg = math.lgamma
    return math.fsum(lg(j) + lg(j + s) - 2.0 * lg(j + s / 2.0) for j in range(1, N + 1))


def moment_product(s: float, N: int) -> float:
    """M_U(s, N) = prod_{j=1}^N Gamma(j) Gamma(j+s) / Gamma(j+s/2)^2."""
    return math.exp(log_moment_product(s, N))


def haar_unitary(N: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` Haar-distributed N x N unitaries (QR of complex Ginibre, phase-fixed)."""
    z = (rng.standard_normal((size, N, N)) + 1j * rng.standard_normal((size, N, N))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[:, None, :]


MC_CHUNK = 5000


def _mc_chunk(args: tuple[int, float, int, int, int]) -> tuple[float, float]:
    N, s, size, seed, index = args
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, index])))
    u = haar_unitary(N, size, rng)
    vals = np.abs(np.linalg.det(u - np.eye(N))) ** s
    return float(vals.sum()), float((vals * vals).sum())


def mc_haar_moment(N: int, s: float, samples: int, seed: int = 0, jobs: int = 1) -> tuple[float, float]:
    """Monte-Carlo estimate of E|det(A - I)|^s over Haar U(N), with its standard error.

    Samples are drawn in fixed chunks, each from PCG64 seeded by (seed, chunk
    index), and chunk sums are combined in chunk order, so the estimate is
    bit-identical for any ``jobs``.
    """
    if samples < 100:
        raise RmtError("need at least 100 samples")
    sizes = [MC_CHUNK] * (samples // MC_CHUNK)
    if samples % MC_CHUNK:
        sizes.append(samples % MC_CHUNK)
    tasks = [(N, s, size, seed, i) for i, size in enumerate(sizes)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            parts = list(pool.map(_mc_chunk, tasks))
    else:
        parts = [_mc_chunk(t) for t in tasks]
    total = math.fsum(p[0] for p in parts)
    total_sq = math.fsum(p[1] for p in parts)
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / (samples - 1)
    return mean, math.sqrt(var / samples)


# -- Barnes G at 1/2 -----------------------------------------------------------


def zeta_prime_2(terms: int = 1000) -> float:
    """zeta'(2) = -sum log(n)/n^2, Euler-Maclaurin tail after ``terms`` terms."""
    M = terms
    head = math.fsum(math.log(n) / (n * n) for n in range(2, M + 1))
    L = math.log(M)
    f = L / M**2
    f1 = (1.0 - 2.0 * L) / M**3
    f3 = (26.0 - 24.0 * L) / M**5
    tail = (L + 1.0) / M - f / 2.0 - f1 / 12.0 + f3 / 720.0
    return -(head + tail)


def log_glaisher() -> float:
    """log A from zeta'(2) = (pi^2/6)(gamma + log 2 pi - 12 log A)."""
    return (EULER_GAMMA + math.log(2.0 * math.pi)) / 12.0 - zeta_prime_2() / (2.0 * math.pi**2)


def zeta_prime_minus_one() -> float:
    return 1.0 / 12.0 - log_glaisher()


def barnes_g_half() -> float:
    """G(1/2) = exp(3/2 zeta'(-1) - 1/4 log pi + 1/24 log 2)."""
    return math.exp(1.5 * zeta_prime_minus_one() - 0.25 * math.log(math.pi) + math.log(2.0) / 24.0)


def barnes_g_product(z: float, terms: int = 10**4) -> float:
    """G(1+z) from the Weierstrass product, truncated after ``terms`` factors.

    The omitted factors contribute sum_{k>K} (z^3/(3k^2) - z^4/(4k^3) + ...),
    added back through the leading tail sums.
    """
    K = terms
    k = np.arange(1, K + 1, dtype=np.float64)
    logs = k * np.log1p(z / k) + z * z / (2.0 * k) - z
    # sum_{k>K} 1/k^2 and 1/k^3 by Euler-Maclaurin
    t2 = 1.0 / K - 1.0 / (2 * K**2) + 1.0 / (6 * K**3)
    t3 = 1.0 / (2 * K**2) - 1.0 / (2 * K**3) + 1.0 / (4 * K**4)
    tail = z**3 / 3.0 * t2 - z**4 / 4.0 * t3
    log_g = (
        z / 2.0 * math.log(2.0 * math.pi)
        - (z + z * z * (1.0 + EULER_GAMMA)) / 2.0
        + math.fsum(logs)
        + tail
    )
    return math.exp(log_g)


# -- densities and probabilities ----------------------------------------------


@dataclass(frozen=True)
class RmtModel:
    k: int
    X: float
    aE_half: float = 1.0

    def __post_init__(self):
        if self.X <= 1:
            raise RmtError("X must exceed 1")
        if self.aE_half <= 0:
            raise RmtError("a_E(-1/2) must be positive")

    @property
    def N(self) -> float:
        """Effective matrix size 2 log X."""
        return 2.0 * math.log(self.X)

    @property
    def N_int(self) -> int:
        return max(1, round(self.N))

    @property
    def C_E(self) -> float:
        return 2.0**0.25 * self.aE_half * barnes_g_half() ** 2


def small_x_density(N: float) -> float:
    """p(x) ~ G(1/2)^2 N^{1/4} for x <= N^{-1/2}."""
    return barnes_g_half() ** 2 * N**0.25


def twist_density_constant(model: RmtModel) -> float:
    """p_E(x) ~ C_E log^{1/4} X."""
    return model.C_E * math.log(model.X) ** 0.25


def class_vanishing_probability(k: int, m, model: RmtModel, constant: float | None = None):
    """(C_E log^{1/4} m / m^{1/2})^{(k-1)/2}, clamped to [0, 1].

    Treats the (k-1)/2 conjugate values |L(1, chi^sigma)| as independent.
    ``constant`` replaces the per-conjugate factor c C_E (default: C_E, i.e.
    box constant c = 1); pass 1.0 to drop all constants. Accepts a scalar or
    an array of conductors.
    """
    m_arr = np.asarray(m, dtype=np.float64)
    if np.any(m_arr < 3):
        raise RmtError("conductor must be >= 3")
    scale = model.C_E if constant is None else constant
    single = scale * np.log(m_arr) ** 0.25 / np.sqrt(m_arr)
    prob = np.clip(single ** ((k - 1) / 2), 0.0, 1.0)
    return float(prob) if prob.ndim == 0 else prob


def growth_classification(k: int) -> str:
    # probabilities decay like m^{-(k-1)/4}; S_k(X) has ~ b_k X members
    d = (k - 1) // 2
    if d < 2:
        return GROWTH_POWER
    if d == 2:
        return GROWTH_SUBPOLYNOMIAL
    return GROWTH_BOUNDED


def conductor_weights(k: int, X: int, coprime_to: int = 1, include_k_squared: bool = True):
    """Admissible conductors m <= X and the number of order-k characters at each."""
    ms, counts = [], []
    for fac in enumerate_conductors(k, X, coprime_to, include_k_squared):
        ms.append(fac.m)
        counts.append((k - 1) ** fac.rank)
    return np.array(ms, dtype=np.int64), np.array(counts, dtype=np.float64)


def heuristic_sum(
    k: int,
    X: int,
    model: RmtModel | None = None,
    coprime_to: int = 1,
    include_k_squared: bool = True,
    constant: float | None = None,
) -> tuple[float, str]:
    """Expected number of vanishing characters of conductor <= X, and its growth regime.

    Sums the vanishing probability over every character in S_k(X), i.e. each
    admissible conductor weighted by its (k-1)^r characters.
    """
    if X < 10:
        raise RmtError("X must be at least 10")
    model = model or RmtModel(k, X)
    ms, counts = conductor_weights(k, X, coprime_to, include_k_squared)
    probs = class_vanishing_probability(k, ms, model, constant) if len(ms) else np.zeros(0)
    return float(math.fsum(counts * probs)), growth_classification(k)


def heuristic_cumulative(
    k: int,
    bounds,
    model: RmtModel | None = None,
    coprime_to: int = 1,
    include_k_squared: bool = True,
    constant: float | None = None,
) -> np.ndarray:
    """heuristic_sum evaluated at each bound in ``bounds`` with one enumeration."""
    bounds = np.asarray(bounds, dtype=np.int64)
    X = int(bounds.max())
    model = model or RmtModel(k, max(X, 3))
    ms, counts = conductor_weights(k, X, coprime_to, include_k_squared)
    contrib = counts * class_vanishing_probability(k, ms, model, constant) if len(ms) else np.zeros(0)
    cum = np.concatenate([[0.0], np.cumsum(contrib)])
    return cum[np.searchsorted(ms, bounds, side="right")]
