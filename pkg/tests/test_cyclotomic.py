import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import Poly, cos, minimal_polynomial as sym_minpoly, pi, symbols

from ectwists.cyclotomic import (
    CyclotomicError,
    RealCycloElement,
    compute_B,
    degree,
    embed,
    embedding_matrix,
    galois_act,
    inverse_norm,
    minimal_polynomial,
    region_basis,
    region_contains,
    round_to_lattice,
)

KS = (3, 5, 7, 11, 13)


@pytest.mark.parametrize("k", KS)
def test_minimal_polynomial_matches_sympy(k):
    x = symbols("x")
    want = Poly(sym_minpoly(2 * cos(2 * pi / k), x), x).all_coeffs()[::-1]
    assert minimal_polynomial(k) == tuple(int(c) for c in want)


def test_embed_examples():
    assert np.allclose(embed(RealCycloElement(5, (0, 0))), 0.0)
    theta = RealCycloElement.theta(5)
    assert np.allclose(embed(theta), [2 * math.cos(math.radians(72)), 2 * math.cos(math.radians(144))])
    assert np.allclose(embed(theta), [0.6180339887, -1.6180339887])
    for k in KS:
        assert np.allclose(embed(RealCycloElement.from_int(k, 1)), 1.0)
    assert galois_act(theta, 1) == pytest.approx(0.6180339887498949)
    assert galois_act(theta, 2) == pytest.approx(-1.618, abs=1e-3)
    assert galois_act(RealCycloElement.from_int(7, 1), 3) == pytest.approx(1.0)
    with pytest.raises(CyclotomicError):
        galois_act(theta, 3)


def test_round_examples():
    zero, res = round_to_lattice([0.001, -0.002], 5)
    assert zero.is_zero()
    # M^{-1} for k=5 sends (0.001, -0.002) to (-0.000236, 0.001236)
    c = np.linalg.solve(embedding_matrix(5), [0.001, -0.002])
    assert res == pytest.approx(np.abs(c).max(), rel=1e-12)
    assert res == pytest.approx(0.0012, abs=2e-4)


@pytest.mark.parametrize("k", KS)
def test_round_inverts_embed(k):
    rng = np.random.default_rng(k)
    for _ in range(200):
        e = RealCycloElement(k, tuple(int(c) for c in rng.integers(-50, 51, degree(k))))
        back, res = round_to_lattice(embed(e), k)
        assert back == e
        assert res < 1e-10
        assert res <= 1e3 * np.finfo(float).eps * inverse_norm(k) * max(1.0, np.abs(embed(e)).max())
        noise = rng.uniform(-1e-4, 1e-4, degree(k))
        back, res = round_to_lattice(embed(e) + noise, k)
        assert back == e
        assert res <= inverse_norm(k) * 1e-4 + 1e-12


@pytest.mark.parametrize("k", KS)
def test_det_is_root_discriminant(k):
    det = abs(np.linalg.det(embedding_matrix(k)))
    assert det == pytest.approx(k ** ((k - 3) / 4), rel=1e-9)
    assert det > 0.1
    assert math.isfinite(inverse_norm(k))


def _element(k):
    return st.tuples(*[st.integers(-20, 20)] * degree(k)).map(lambda c: RealCycloElement(k, c))


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(KS).flatmap(lambda k: st.tuples(_element(k), _element(k))))
def test_ring_homomorphism(pair):
    e, f = pair
    assert np.allclose(embed(e + f), embed(e) + embed(f), atol=1e-9)
    assert np.allclose(embed(e - f), embed(e) - embed(f), atol=1e-9)
    assert np.allclose(embed(e * f), embed(e) * embed(f), rtol=1e-12, atol=1e-9)
    assert e * f == f * e
    assert (e - e).is_zero()
    assert -(-e) == e


def test_theta_relation():
    for k in KS:
        theta = RealCycloElement.theta(k)
        acc = RealCycloElement.from_int(k, 0)
        power = RealCycloElement.from_int(k, 1)
        for c in minimal_polynomial(k):
            acc = acc + RealCycloElement.from_int(k, c) * power
            power = power * theta
        assert acc.is_zero()


def test_mixed_orders_rejected():
    with pytest.raises(CyclotomicError):
        RealCycloElement.theta(5) + RealCycloElement.theta(7)


def test_compute_B():
    assert compute_B(5) == pytest.approx(1 + 2 * math.cos(math.radians(36)), abs=1e-9)
    assert compute_B(5) == pytest.approx(2.618, abs=1e-3)
    nodes = 2 * np.cos(2 * np.pi * np.arange(1, 4) / 7)
    want = max(1 + abs(x) + x * x for x in nodes)
    assert compute_B(7) == pytest.approx(want, rel=1e-12)
    for k in KS:
        assert compute_B(k) >= 1
    # the k=5 region basis {alpha, alpha^tau} has B = sqrt 5
    assert compute_B(5, region_basis(5)) == pytest.approx(math.sqrt(5))


def test_region_examples():
    for region in ("R", "R1", "R2", "Rprime"):
        assert region_contains([0.0, 0.0], region, 5)
    assert not region_contains([1.5, 1.5], "R1", 5)
    assert region_contains([1.5, 1.5], "R2", 5)
    with pytest.raises(CyclotomicError, match="region defined only for k=5"):
        region_contains([0, 0, 0], "R1", 7)
    with pytest.raises(CyclotomicError):
        region_contains([0, 0], "S", 5)


def test_region_nesting():
    rng = np.random.default_rng(0)
    points = rng.uniform(-3, 3, size=(10_000, 2))
    for v in points:
        r1, r, r2, rp = (region_contains(v, name, 5) for name in ("R1", "R", "R2", "Rprime"))
        assert not r1 or r
        assert not r or r2
        assert not r or rp


@pytest.mark.parametrize("k", (5, 7, 11))
def test_region_R_holds_only_zero(k):
    """R is a fundamental box for the lattice: the only lattice point inside is 0."""
    rng = np.random.default_rng(k)
    for _ in range(2000):
        e = RealCycloElement(k, tuple(int(c) for c in rng.integers(-3, 4, degree(k))))
        assert region_contains(embed(e), "R", k) == e.is_zero()
