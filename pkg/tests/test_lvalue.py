import math

import numpy as np
import pytest

from ectwists.curve import an_table, get_curve
from ectwists.cyclotomic import degree, galois_act
from ectwists.dirichlet import (
    CharacterError,
    conjugate_char,
    enumerate_classes,
    enumerate_conductors,
    trivial_character,
)
from ectwists.lvalue import (
    AfeParams,
    LValueError,
    TwistEvaluator,
    algebraic_vector,
    check_specialvalue_identity,
    l_value_afe,
    lambda_plus_smoothed,
    modular_symbols,
    symbol_offset,
    truncation_length,
    untwisted_central_value,
)

from .conftest import LABELS


def _fold(t, k):
    t %= k
    return min(t, k - t)


def test_truncation_length_bound():
    for m, N, eps in ((7, 11, 1e-10), (2000, 15, 1e-12), (1, 37, 1e-6)):
        n = truncation_length(m, N, eps)
        assert n >= m * math.sqrt(N) / (2 * math.pi) * math.log(1 / eps)
        assert truncation_length(m, N, eps, 1.3) > n
        assert AfeParams(eps).terms(m, N) == n
    assert AfeParams(n_max=99).terms(7, 11) == 99


def test_first_twist_nonzero_and_stable(e11, table11):
    spec = enumerate_classes(3, 7)[0].representative
    base = AfeParams(1e-12)
    n = base.terms(7, 11)
    value = l_value_afe(e11, spec, base, table11)
    doubled = l_value_afe(e11, spec, AfeParams(n_max=2 * n), table11)
    assert abs(value) > 0.1
    assert abs(value - doubled) < 1e-8


def test_split_invariance(e11, table11):
    eps = 1e-10
    for k in (3, 5, 7):
        for fac in list(enumerate_conductors(k, 600, 11))[:12]:
            for spec in enumerate_classes(k, fac)[0].members():
                a = l_value_afe(e11, spec, AfeParams(eps, 1.0), table11)
                b = l_value_afe(e11, spec, AfeParams(eps, 1.3), table11)
                assert abs(a - b) < 10 * eps


def test_trivial_character_odd_curve(e37):
    value = l_value_afe(e37, trivial_character(3), AfeParams(1e-12))
    assert abs(value) < 1e-12
    assert untwisted_central_value(get_curve("11a1"), 1) == pytest.approx(0.2 * 1.2692093042795534, rel=1e-10)


def test_errors(e11):
    spec = enumerate_classes(3, 7)[0].representative
    with pytest.raises(LValueError, match="twist conductor not coprime to curve conductor"):
        l_value_afe(e11, enumerate_classes(5, 11)[0].representative, AfeParams(), an_table(e11, 10))
    with pytest.raises(LValueError, match="twist conductor not coprime"):
        algebraic_vector(get_curve("14a1"), enumerate_classes(3, 7)[0])
    with pytest.raises(LValueError, match="insufficient coefficients"):
        l_value_afe(e11, spec, AfeParams(), an_table(e11, 10))
    with pytest.raises(LValueError):
        TwistEvaluator(e11, an_table(e11, 100), AfeParams(n_max=3)).record(spec)


@pytest.mark.parametrize("label", LABELS)
def test_records_real_and_magnitudes(label):
    curve = get_curve(label)
    table = an_table(curve, truncation_length(800, curve.conductor, 1e-12))
    ev = TwistEvaluator(curve, table)
    for k in (3, 5, 7):
        for fac in enumerate_conductors(k, 800, curve.conductor):
            for cls in enumerate_classes(k, fac):
                rec = ev.record(cls)
                assert rec.residual < 1e-3
                assert rec.max_imag < 1e-6
                assert len(rec.l_values) == degree(k)
                for t, err in enumerate(rec.magnitude_errors(curve), start=1):
                    assert err < 1e-5 * max(1.0, abs(galois_act(rec.element, t)))
                assert rec.vanishing == rec.element.is_zero()


def test_odd_root_number_curve(e37):
    table = an_table(e37, truncation_length(400, 37, 1e-12))
    ev = TwistEvaluator(e37, table)
    seen = 0
    for k in (3, 5):
        for fac in enumerate_conductors(k, 400, 37):
            for cls in enumerate_classes(k, fac):
                rec = ev.record(cls)
                assert rec.residual < 1e-3
                assert max(rec.magnitude_errors(e37)) < 1e-5 * max(1.0, max(map(abs, rec.n_values)))
                seen += 1
    assert seen > 20


@pytest.mark.parametrize("k,m", [(3, 7 * 13), (5, 31 * 41), (7, 29), (7, 43 * 29)])
def test_galois_equivariance(e11, table11, k, m):
    ev = TwistEvaluator(e11, table11)
    for cls in enumerate_classes(k, m):
        base = ev.record(cls)
        for c in range(2, k):
            other = ev.record(conjugate_char(cls.representative, c))
            assert other.vanishing == base.vanishing
            for t in range(1, degree(k) + 1):
                want = galois_act(base.element, _fold(c * t, k))
                assert galois_act(other.element, t) == pytest.approx(want, abs=1e-9)


def test_lambda_plus_symmetry(e11, table11):
    for m in (7, 9, 13):
        for a in range(1, m):
            assert lambda_plus_smoothed(e11, a, m, table11) == pytest.approx(
                lambda_plus_smoothed(e11, m - a, m, table11), abs=1e-9
            )
    with pytest.raises(LValueError, match="need 0 < a < m"):
        lambda_plus_smoothed(e11, 0, 7, table11)


@pytest.mark.xfail(strict=True, reason="lambda^+/Omega carries the constant 2L(E,1)/Omega = 2/5 for 11a1")
def test_raw_symbols_integral(e11, table11):
    symbols = modular_symbols(e11, 7, table11)[1:]
    assert np.all(np.abs(symbols - np.rint(symbols)) < 1e-2)


@pytest.mark.parametrize("label,offset", [("11a1", 2 / 5), ("14a1", 1 / 3), ("15a1", 1 / 4)])
def test_shifted_symbols_integral(label, offset):
    curve = get_curve(label)
    table = an_table(curve, 200_000)
    assert symbol_offset(curve, table) == pytest.approx(offset, abs=1e-9)
    for m in (7, 13, 19):
        if math.gcd(m, curve.conductor) > 1:
            continue
        shifted = modular_symbols(curve, m, table)[1:] - offset
        assert np.all(np.abs(shifted - np.rint(shifted)) < 1e-2)


@pytest.mark.parametrize("m", [7, 9, 13])
def test_specialvalue_identity(e11, table11, m):
    assert check_specialvalue_identity(e11, 3, m, table=table11) < 1e-3


def test_specialvalue_identity_quintic(e11, table11):
    assert check_specialvalue_identity(e11, 5, 31, table=table11) < 1e-3


def test_specialvalue_no_character(e11):
    with pytest.raises(CharacterError, match="no primitive order-3 character mod 10"):
        check_specialvalue_identity(e11, 3, 10)
