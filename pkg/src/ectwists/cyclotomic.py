"""The ring Z[xi_k]^+ = Z[theta], theta = xi_k + xi_k^{-1}, as a lattice in R^d.

Elements are integer coordinate vectors in the power basis
1, theta, ..., theta^{d-1}, d = (k-1)/2. The real embeddings are
sigma_t: theta -> 2 cos(2 pi t/k) for t = 1..d, sigma_1 the identity.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from sympy import isprime

logger = logging.getLogger(__name__)

REGIONS = ("R", "R1", "R2", "Rprime")

# rounding residual above which a lattice point is not trusted
RESIDUAL_LIMIT = 0.1


class CyclotomicError(ValueError):
    pass


def degree(k: int) -> int:
    if k < 3 or not isprime(k):
        raise CyclotomicError(f"k must be an odd prime, got {k}")
    return (k - 1) // 2


@lru_cache(maxsize=None)
def minimal_polynomial(k: int) -> tuple[int, ...]:
    """Integer coefficients (constant term first) of the monic minimal polynomial of theta.

    Uses 1 + sum_{j=1}^{d} (xi^j + xi^-j) = 0 with xi^j + xi^-j = D_j(theta),
    D_0 = 2, D_1 = x, D_{j+1} = x D_j - D_{j-1}.
    """
    d = degree(k)
    D_prev = np.zeros(d + 1, dtype=object)
    D_prev[0] = 2
    D_cur = np.zeros(d + 1, dtype=object)
    D_cur[1] = 1
    total = np.zeros(d + 1, dtype=object)
    total[0] = 1
    for j in range(1, d + 1):
        total = total + D_cur
        shifted = np.zeros(d + 1, dtype=object)
        shifted[1:] = D_cur[:-1]
        D_prev, D_cur = D_cur, shifted - D_prev
    assert total[d] == 1
    return tuple(int(c) for c in total)


@dataclass(frozen=True)
class RealCycloElement:
    k: int
    coords: tuple[int, ...]

    def __post_init__(self):
        if len(self.coords) != degree(self.k):
            raise CyclotomicError("need (k-1)/2 coordinates")

    @classmethod
    def from_int(cls, k: int, n: int) -> RealCycloElement:
        return cls(k, (n,) + (0,) * (degree(k) - 1))

    @classmethod
    def theta(cls, k: int) -> RealCycloElement:
        d = degree(k)
        if d == 1:
            # theta = 2 cos(2 pi/3) = -1
            return cls(k, (-1,))
        return cls(k, (0, 1) + (0,) * (d - 2))

    def is_zero(self) -> bool:
        return not any(self.coords)

    def _check(self, other: RealCycloElement) -> None:
        if other.k != self.k:
            raise CyclotomicError("elements of different fields")

    def __add__(self, other: RealCycloElement) -> RealCycloElement:
        self._check(other)
        return RealCycloElement(self.k, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: RealCycloElement) -> RealCycloElement:
        self._check(other)
        return RealCycloElement(self.k, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> RealCycloElement:
        return RealCycloElement(self.k, tuple(-a for a in self.coords))

    def __mul__(self, other: RealCycloElement) -> RealCycloElement:
        self._check(other)
        d = degree(self.k)
        prod = [0] * (2 * d - 1)
        for i, a in enumerate(self.coords):
            if a:
                for j, b in enumerate(other.coords):
                    prod[i + j] += a * b
        poly = minimal_polynomial(self.k)
        # reduce theta^n, n >= d, using the monic relation
        for n in range(2 * d - 2, d - 1, -1):
            c = prod[n]
            if c:
                prod[n] = 0
                for i in range(d):
                    prod[n - d + i] -= c * poly[i]
        return RealCycloElement(self.k, tuple(prod[:d]))

    def __str__(self) -> str:
        return ";".join(str(c) for c in self.coords)


def embedding_nodes(k: int) -> np.ndarray:
    """sigma_t(theta) = 2 cos(2 pi t/k), t = 1..d."""
    d = degree(k)
    return 2.0 * np.cos(2.0 * np.pi * np.arange(1, d + 1) / k)


@lru_cache(maxsize=None)
def embedding_matrix(k: int) -> np.ndarray:
    """M[i, j] = sigma_{i+1}(theta^j)."""
    M = np.vander(embedding_nodes(k), degree(k), increasing=True)
    M.flags.writeable = False
    return M


@lru_cache(maxsize=None)
def inverse_embedding_matrix(k: int) -> np.ndarray:
    Minv = np.linalg.inv(embedding_matrix(k))
    logger.debug("k=%d: ||M^-1||_inf = %.3g", k, np.abs(Minv).sum(axis=1).max())
    Minv.flags.writeable = False
    return Minv


def inverse_norm(k: int) -> float:
    """Infinity norm of M^{-1}: worst-case amplification of embedding errors."""
    return float(np.abs(inverse_embedding_matrix(k)).sum(axis=1).max())


def embed(elem: RealCycloElement) -> np.ndarray:
    return embedding_matrix(elem.k) @ np.asarray(elem.coords, dtype=float)


def galois_act(elem: RealCycloElement, t: int) -> float:
    """sigma_t(elem) as a real number, 1 <= t <= d."""
    d = degree(elem.k)
    if not 1 <= t <= d:
        raise CyclotomicError(f"embedding index must be in 1..{d}")
    return float(embedding_matrix(elem.k)[t - 1] @ np.asarray(elem.coords, dtype=float))


def round_to_lattice(v, k: int) -> tuple[RealCycloElement, float]:
    """Nearest lattice point in power-basis coordinates and the rounding residual."""
    c = inverse_embedding_matrix(k) @ np.asarray(v, dtype=float)
    r = np.rint(c)
    residual = float(np.max(np.abs(c - r))) if len(c) else 0.0
    return RealCycloElement(k, tuple(int(x) for x in r)), residual


def compute_B(k: int, basis: np.ndarray | None = None) -> float:
    """max_i sum_j |sigma_i(alpha_j)| for an integral basis given in power coordinates.

    The default basis is the power basis, so B is the largest row sum of |M|.
    """
    M = embedding_matrix(k)
    images = M if basis is None else M @ np.asarray(basis, dtype=float)
    return float(np.abs(images).sum(axis=1).max())


@lru_cache(maxsize=None)
def region_basis(k: int) -> np.ndarray:
    """Integral basis (columns, power coordinates) whose unit box defines R.

    For k = 5 this is {alpha, alpha^tau} with alpha = (1 + sqrt 5)/2 = 1 + theta
    and alpha^tau = -theta; otherwise the power basis.
    """
    if k == 5:
        B = np.array([[1.0, 0.0], [1.0, -1.0]])
    else:
        B = np.eye(degree(k))
    B.flags.writeable = False
    return B


def region_contains(v, region: str, k: int) -> bool:
    v = np.asarray(v, dtype=float)
    if region == "R":
        lattice = embedding_matrix(k) @ region_basis(k)
        coeffs = np.linalg.solve(lattice, v)
        # open box; the margin keeps boundary lattice points (coords +-1) outside
        return bool(np.all(np.abs(coeffs) < 1.0 - 1e-9))
    if region in ("R1", "R2"):
        if k != 5:
            raise CyclotomicError("region defined only for k=5")
        bound = 1.0 if region == "R1" else math.sqrt(5.0)
        return bool(np.all(np.abs(v) < bound))
    if region == "Rprime":
        return bool(np.all(np.abs(v) <= compute_B(k)))
    raise CyclotomicError(f"unknown region {region!r}; expected one of {REGIONS}")
