"""Twisted central values L_E(1, chi) and the algebraic integer n_E(chi).

L_E(1, chi) is evaluated with the approximate functional equation obtained by
splitting the Mellin integral of Lambda_E(s, chi) at t = 1/A:

    L_E(1, chi) = sum_n a_n chi(n)/n exp(-2 pi n/(A m sqrt N))
                  + eps(chi) sum_n a_n conj(chi(n))/n exp(-2 pi n A/(m sqrt N)),

    eps(chi) = w_E chi(N) tau(chi)^2/m.

For a class of order-k characters, every Galois conjugate chi^t shares the
partial sums over n with fixed chi-exponent, so all (k-1)/2 embeddings of
n_E(chi) cost one pass over the coefficients.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .curve import CoefficientTable, CurveData, an_table
from .cyclotomic import (
    RESIDUAL_LIMIT,
    RealCycloElement,
    degree,
    embedding_matrix,
    galois_act,
    round_to_lattice,
)
from .dirichlet import (
    CharacterError,
    CharacterSpec,
    ConjugacyClass,
    char_exponent,
    conjugate_char,
    enumerate_classes,
    exponent_table,
    gauss_sum,
    root_of_unity,
    trivial_character,
)

logger = logging.getLogger(__name__)

DEFAULT_EPS = 1e-10
SPLITS = (1.0, 1.3)


class LValueError(ValueError):
    pass


class PrecisionError(LValueError):
    """The AFE value was not accurate enough to pin down the lattice point."""


# -- truncation -------------------------------------------------------------


def truncation_length(m: int, conductor: int, eps: float, split: float = 1.0) -> int:
    """Terms needed for absolute error <= eps, using |a_n| <= n for the tail."""
    scale = m * math.sqrt(conductor)
    q = scale / (2.0 * math.pi) * max(split, 1.0 / split)
    return math.ceil(q * (math.log(1.0 / eps) + 2.0 * math.log(2.0 + scale)))


@dataclass(frozen=True)
class AfeParams:
    eps: float = DEFAULT_EPS
    split: float = 1.0
    n_max: int | None = None  # None: derived from eps, m and N_E

    def terms(self, m: int, conductor: int) -> int:
        if self.n_max is not None:
            return self.n_max
        return truncation_length(m, conductor, self.eps, self.split)

    def with_eps(self, eps: float) -> AfeParams:
        return AfeParams(eps, self.split, None if self.n_max is None else self.n_max)


# -- core sums --------------------------------------------------------------


class _ConductorWeights:
    """Per-conductor smoothing weights a_n/n * exp(-c n), shared by all classes."""

    def __init__(self, table: CoefficientTable, m: int, conductor: int, n_terms: int, split: float):
        if n_terms > table.n_max:
            raise LValueError("insufficient coefficients")
        n = np.arange(1, n_terms + 1, dtype=np.float64)
        base = table.coeffs[1 : n_terms + 1] / n
        x = 2.0 * np.pi * n / (m * math.sqrt(conductor))
        self.m = m
        self.n_terms = n_terms
        self.split = split
        self.residues = np.arange(1, n_terms + 1, dtype=np.int64) % m
        self.direct = base * np.exp(-x / split)
        self.dual = base * np.exp(-x * split)


def _exponent_sums(spec: CharacterSpec, weights: _ConductorWeights) -> tuple[np.ndarray, np.ndarray]:
    """S[j] = sum of weights over n with chi(n) = xi_k^j, for both sums."""
    k = spec.k
    if spec.m == 1:
        s1 = np.zeros(k)
        s2 = np.zeros(k)
        s1[0] = weights.direct.sum()
        s2[0] = weights.dual.sum()
        return s1, s2
    ex = exponent_table(spec)[weights.residues]
    mask = ex >= 0
    ex = ex[mask]
    s1 = np.bincount(ex, weights=weights.direct[mask], minlength=k)
    s2 = np.bincount(ex, weights=weights.dual[mask], minlength=k)
    return s1, s2


def root_number_twist(curve: CurveData, spec: CharacterSpec, tau: complex | None = None) -> complex:
    """eps(chi) = w_E chi(N_E) tau(chi)^2 / m."""
    if tau is None:
        tau = gauss_sum(spec)
    chi_n = 1.0 if spec.m == 1 else spec(curve.conductor)
    return curve.sign * chi_n * tau * tau / spec.m


def _combine(s1: np.ndarray, s2: np.ndarray, t: int, eps_t: complex, k: int) -> complex:
    powers = np.exp(2j * np.pi * ((t * np.arange(k)) % k) / k)
    return complex(s1 @ powers + eps_t * (s2 @ powers.conj()))


def _check_coprime(curve: CurveData, m: int) -> None:
    if math.gcd(m, curve.conductor) != 1:
        raise LValueError("twist conductor not coprime to curve conductor")


def l_value_afe(
    curve: CurveData,
    spec: CharacterSpec,
    params: AfeParams = AfeParams(),
    table: CoefficientTable | None = None,
) -> complex:
    """L_E(1, chi) by the approximate functional equation."""
    _check_coprime(curve, spec.m)
    n_terms = params.terms(spec.m, curve.conductor)
    if table is None:
        table = an_table(curve, n_terms)
    weights = _ConductorWeights(table, spec.m, curve.conductor, n_terms, params.split)
    s1, s2 = _exponent_sums(spec, weights)
    return _combine(s1, s2, 1, root_number_twist(curve, spec), spec.k)


def untwisted_central_value(
    curve: CurveData, w: int, split: float = 1.0, eps: float = 1e-12, table: CoefficientTable | None = None
) -> float:
    """L_E(1) assuming root number w; only consistent across splits for the true w."""
    n_terms = truncation_length(1, curve.conductor, eps, split)
    if table is None or table.n_max < n_terms:
        table = an_table(curve, n_terms)
    weights = _ConductorWeights(table, 1, curve.conductor, n_terms, split)
    return float(weights.direct.sum() + w * weights.dual.sum())


# -- n_E(chi) ---------------------------------------------------------------


@dataclass(frozen=True)
class TwistRecord:
    k: int
    m: int
    class_id: int
    char_label: str
    l_values: tuple[complex, ...]  # L(1, chi^{sigma_t}), t = 1..d
    n_values: tuple[float, ...]  # sigma_t(n_E(chi)) before rounding
    element: RealCycloElement
    residual: float
    vanishing: bool
    afe_terms: int
    max_imag: float

    def magnitude_errors(self, curve: CurveData) -> list[float]:
        """| |L_t| 2 sqrt(m)/Omega s_t - |sigma_t(n_E)| | per conjugate."""
        out = []
        for t, lt in enumerate(self.l_values, start=1):
            s_t = 1.0 if curve.sign == 1 else 2.0 * abs(math.sin(2.0 * math.pi * t / self.k))
            lhs = abs(lt) * 2.0 * math.sqrt(self.m) / curve.real_period * s_t
            out.append(abs(lhs - abs(galois_act(self.element, t))))
        return out


class TwistEvaluator:
    """Computes TwistRecords for one curve, reusing per-conductor weights."""

    def __init__(self, curve: CurveData, table: CoefficientTable, params: AfeParams = AfeParams()):
        self.curve = curve
        self.table = table
        self.params = params
        self._weights: _ConductorWeights | None = None

    def _weights_for(self, m: int, params: AfeParams) -> _ConductorWeights:
        n_terms = params.terms(m, self.curve.conductor)
        w = self._weights
        if w is None or (w.m, w.n_terms, w.split) != (m, n_terms, params.split):
            w = _ConductorWeights(self.table, m, self.curve.conductor, n_terms, params.split)
            self._weights = w
        return w

    def conjugate_values(self, spec: CharacterSpec, params: AfeParams | None = None) -> list[complex]:
        """L(1, chi^{sigma_t}) for t = 1..d."""
        params = params or self.params
        _check_coprime(self.curve, spec.m)
        weights = self._weights_for(spec.m, params)
        s1, s2 = _exponent_sums(spec, weights)
        k = spec.k
        values = []
        for t in range(1, degree(k) + 1):
            conj = conjugate_char(spec, t)
            values.append(_combine(s1, s2, t, root_number_twist(self.curve, conj), k))
        return values

    def record(self, cls: ConjugacyClass | CharacterSpec, params: AfeParams | None = None) -> TwistRecord:
        params = params or self.params
        try:
            return self._record(cls, params)
        except PrecisionError:
            retry = params.with_eps(params.eps / 100.0)
            logger.info("retrying %s at eps=%g", _spec_of(cls).label, retry.eps)
            return self._record(cls, retry)

    def _record(self, cls: ConjugacyClass | CharacterSpec, params: AfeParams) -> TwistRecord:
        spec = _spec_of(cls)
        class_id = cls.class_id if isinstance(cls, ConjugacyClass) else -1
        k, m = spec.k, spec.m
        curve = self.curve
        omega = curve.real_period
        values = self.conjugate_values(spec, params)
        amp = 2.0 * math.sqrt(m) / omega
        n_vals = []
        max_imag = 0.0
        for t, lt in enumerate(values, start=1):
            conj = conjugate_char(spec, t)
            tau_bar = gauss_sum(conjugate_char(conj, k - 1))
            l_alg = 2.0 * tau_bar * lt / omega
            e_n = char_exponent(conj, curve.conductor)
            # chi(N)^{-(k+1)/2} in exact exponent arithmetic
            nt = l_alg * root_of_unity(-e_n * (k + 1) // 2, k)
            if curve.sign == -1:
                nt *= root_of_unity(-t, k) - root_of_unity(t, k)
            tol = max(10.0 * params.eps * amp, 1e-9) * max(1.0, abs(nt))
            if abs(nt.imag) > tol:
                raise LValueError(
                    f"rotation inconsistency (check w_E / tau): {spec.label} t={t} imag={nt.imag:.3g}"
                )
            max_imag = max(max_imag, abs(nt.imag) / max(1.0, abs(nt)))
            n_vals.append(nt.real)
        element, residual = round_to_lattice(n_vals, k)
        if residual >= RESIDUAL_LIMIT:
            raise PrecisionError(f"insufficient precision: {spec.label} residual={residual:.3g}")
        return TwistRecord(
            k=k,
            m=m,
            class_id=class_id,
            char_label=spec.label,
            l_values=tuple(values),
            n_values=tuple(n_vals),
            element=element,
            residual=residual,
            vanishing=element.is_zero(),
            afe_terms=params.terms(m, curve.conductor),
            max_imag=max_imag,
        )


def _spec_of(cls: ConjugacyClass | CharacterSpec) -> CharacterSpec:
    return cls.representative if isinstance(cls, ConjugacyClass) else cls


def algebraic_vector(
    curve: CurveData,
    cls: ConjugacyClass | CharacterSpec,
    params: AfeParams = AfeParams(),
    table: CoefficientTable | None = None,
) -> TwistRecord:
    """Embeddings of n_E(chi) for one Galois class, rounded to Z[xi_k]^+."""
    spec = _spec_of(cls)
    _check_coprime(curve, spec.m)
    n_terms = params.terms(spec.m, curve.conductor)
    if table is None or table.n_max < n_terms:
        table = an_table(curve, max(n_terms, truncation_length(spec.m, curve.conductor, params.eps / 100)))
    return TwistEvaluator(curve, table, params).record(cls)


# -- modular symbols (small-m oracle) ----------------------------------------

SMOOTHING_DELTA = 1e-3
_SMOOTHING_CUTOFF = 40.0  # exp(-40) ~ 4e-18


def smoothing_terms(delta: float = SMOOTHING_DELTA) -> int:
    return math.ceil(_SMOOTHING_CUTOFF / (delta / 4.0))


def lambda_plus_smoothed(
    curve: CurveData,
    a: int,
    m: int,
    table: CoefficientTable | None = None,
    delta: float = SMOOTHING_DELTA,
) -> float:
    """lambda^+(a, m) = 2 sum a_n/n cos(2 pi a n/m), Abel-summed and extrapolated to delta -> 0."""
    if not 0 < a < m:
        raise LValueError("need 0 < a < m")
    n_terms = smoothing_terms(delta)
    if table is None or table.n_max < n_terms:
        table = an_table(curve, n_terms)
    n = np.arange(1, n_terms + 1, dtype=np.int64)
    base = table.coeffs[1 : n_terms + 1] / n * 2.0 * np.cos(2.0 * np.pi * ((a * n) % m) / m)
    estimates = [float(base @ np.exp(-n * (delta / 2**i))) for i in range(3)]
    # Richardson for an error expansion in powers of delta
    r1 = [2.0 * estimates[i + 1] - estimates[i] for i in range(2)]
    r2 = (4.0 * r1[1] - r1[0]) / 3.0
    if max(abs(r1[0] - r1[1]), abs(r2 - r1[1])) > 0.05 * curve.real_period:
        raise LValueError("smoothing failed")
    return r2


def modular_symbols(curve: CurveData, m: int, table: CoefficientTable | None = None) -> np.ndarray:
    """lambda^+(a, m)/Omega_E for a = 0..m-1 (entry 0 unused, set to nan)."""
    n_terms = smoothing_terms()
    if table is None or table.n_max < n_terms:
        table = an_table(curve, n_terms)
    out = np.full(m, np.nan)
    for a in range(1, m):
        out[a] = lambda_plus_smoothed(curve, a, m, table) / curve.real_period
    return out


def symbol_offset(curve: CurveData, table: CoefficientTable | None = None) -> float:
    """lambda^+(0, 1)/Omega_E = 2 L_E(1)/Omega_E.

    Each lambda^+(a, m)/Omega_E with gcd(m, N_E) = 1 differs from this value by
    an integer, so the offset is removed before rounding. It cancels in every
    sum against a nontrivial character.
    """
    return 2.0 * untwisted_central_value(curve, curve.sign, table=table) / curve.real_period


def integral_symbols(curve: CurveData, m: int, table: CoefficientTable | None = None) -> np.ndarray:
    """Integers round(lambda^+(a, m)/Omega_E - 2 L_E(1)/Omega_E), a = 0..m-1 (entry 0 is 0)."""
    symbols = modular_symbols(curve, m, table) - symbol_offset(curve, table)
    symbols[0] = 0.0
    return np.rint(symbols).astype(np.int64)


def specialvalue_from_symbols(curve: CurveData, spec: CharacterSpec, symbols: np.ndarray) -> complex:
    """Omega_E/(2 tau(chi-bar)) sum_a chi-bar(a) Lambda(a, m) for integer symbols Lambda."""
    m, k = spec.m, spec.k
    chi_bar = conjugate_char(spec, k - 1)
    expo = exponent_table(chi_bar)
    total = 0j
    for a in range(1, m):
        if expo[a] >= 0:
            total += root_of_unity(int(expo[a]), k) * int(symbols[a])
    return curve.real_period / (2.0 * gauss_sum(chi_bar)) * total


def check_specialvalue_identity(
    curve: CurveData, k: int, m: int, params: AfeParams = AfeParams(), table: CoefficientTable | None = None
) -> float:
    """Largest disagreement between the AFE and modular-symbol evaluations of L(1, chi) mod m."""
    classes = enumerate_classes(k, m)
    _check_coprime(curve, m)
    n_terms = max(smoothing_terms(), params.terms(m, curve.conductor))
    if table is None or table.n_max < n_terms:
        table = an_table(curve, n_terms)
    symbols = integral_symbols(curve, m, table)
    worst = 0.0
    for cls in classes:
        for spec in cls.members():
            afe = l_value_afe(curve, spec, params, table)
            worst = max(worst, abs(afe - specialvalue_from_symbols(curve, spec, symbols)))
    return worst


__all__ = [
    "AfeParams",
    "CharacterError",
    "LValueError",
    "PrecisionError",
    "TwistEvaluator",
    "TwistRecord",
    "algebraic_vector",
    "check_specialvalue_identity",
    "embedding_matrix",
    "l_value_afe",
    "lambda_plus_smoothed",
    "integral_symbols",
    "modular_symbols",
    "trivial_character",
    "truncation_length",
    "untwisted_central_value",
]
