"""Fast self-checks of the identities the computations rely on (``ectwists check``)."""

from __future__ import annotations

import math
from typing import Callable

from .curve import an_table, get_curve
from .dirichlet import enumerate_classes, enumerate_conductors, gauss_sum
from .lvalue import AfeParams, TwistEvaluator, check_specialvalue_identity, truncation_length
from .rmt import barnes_g_half, barnes_g_product, moment_product


def check_gauss_sums() -> tuple[bool, str]:
    worst = 0.0
    for k in (3, 5, 7):
        for fac in enumerate_conductors(k, 300):
            for cls in enumerate_classes(k, fac):
                for spec in cls.members():
                    worst = max(worst, abs(abs(gauss_sum(spec)) ** 2 - fac.m))
    return worst < 1e-6, f"max | |tau|^2 - m | = {worst:.2e}"


def check_coefficients() -> tuple[bool, str]:
    bad = 0
    for curve in (get_curve("11a1"), get_curve("14a1"), get_curve("15a1")):
        a = an_table(curve, 2000).coeffs
        for m in range(2, 45):
            for n in range(2, 2000 // m + 1):
                if math.gcd(m, n) == 1 and a[m * n] != a[m] * a[n]:
                    bad += 1
    return bad == 0, f"{bad} multiplicativity violations for n <= 2000"


def check_specialvalue() -> tuple[bool, str]:
    err = check_specialvalue_identity(get_curve("11a1"), 3, 7)
    return err < 1e-3, f"11a1, k=3, m=7: AFE vs modular symbols {err:.2e}"


def check_integrality() -> tuple[bool, str]:
    curve = get_curve("11a1")
    worst = 0.0
    for k in (3, 5):
        table = an_table(curve, truncation_length(300, curve.conductor, 1e-12))
        ev = TwistEvaluator(curve, table, AfeParams())
        for fac in enumerate_conductors(k, 300, curve.conductor):
            for cls in enumerate_classes(k, fac):
                worst = max(worst, ev.record(cls).residual)
    return worst < 1e-3, f"11a1, k in {{3,5}}, m <= 300: max residual {worst:.2e}"


def check_moments() -> tuple[bool, str]:
    worst = max(abs(moment_product(2.0, N) / (N + 1) - 1.0) for N in (1, 10, 100, 1000))
    return worst < 1e-9, f"M_U(2, N) = N + 1 to relative {worst:.2e}"


def check_barnes() -> tuple[bool, str]:
    a = barnes_g_half()
    b = barnes_g_product(0.5) / math.sqrt(math.pi)
    return abs(a - b) < 1e-8, f"G(1/2) = {a:.15f}, product {b:.15f}"


CHECKS: dict[str, Callable[[], tuple[bool, str]]] = {
    "gauss-sums": check_gauss_sums,
    "coefficients": check_coefficients,
    "specialvalue": check_specialvalue,
    "integrality": check_integrality,
    "moments": check_moments,
    "barnes": check_barnes,
}


def run_checks(echo: Callable[[str], None] = print) -> bool:
    ok_all = True
    for name, fn in CHECKS.items():
        ok, detail = fn()
        ok_all &= ok
        echo(f"{'PASS' if ok else 'FAIL'}  {name:14s} {detail}")
    return ok_all
