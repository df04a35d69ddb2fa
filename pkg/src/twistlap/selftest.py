"""Closed-form oracle suite behind ``twistlap selftest``; each check is fast."""

from __future__ import annotations

import math
from fractions import Fraction

from .asymptotics import heisenberg_check, theory_exponents
from .eigenbasis import (
    EigenLabel,
    build_eigenfunction,
    build_radial,
    enumerate_labels,
    exact_l2_norm_sq,
    radial_closed_forms,
)
from .hermite_core import CPoly, GaussianFn, apply_L, evaluate
from .moments import ExactValue, inner_exact, lp_norm_exact_even
from .opnorm import candidate_ratio_zbar, norm_2_to_infty, norm_2_to_p_lower_power
from .projection import expand, kernel_diag_origin
from .quadrature import lp_norm_numeric


def _gamma_formula(n: int, k: int, p: int) -> ExactValue:
    s = k * p // 2
    return ExactValue(Fraction(2, p) ** n * Fraction(2, p) ** s * math.factorial(s), n)


def check_gamma_formula():
    for n in (1, 2):
        for k in range(6):
            g = GaussianFn(CPoly.monomial((k,) + (0,) * (n - 1), (0,) * n))
            for p in (2, 4, 6):
                if lp_norm_exact_even(g, p) != _gamma_formula(n, k, p):
                    return False, f"n={n} k={k} p={p}"
    return True, "n<=2, k<=5, p in {2,4,6}"


def check_z_gaussian():
    g = GaussianFn(CPoly.monomial((1,), (0,)))
    ex = lp_norm_exact_even(g, 4)
    num = lp_norm_numeric(g, 4).value ** 4
    ok = ex == ExactValue(Fraction(1, 4), 1) and abs(num - math.pi / 4) < 1e-10
    return ok, f"exact {ex}, quadrature {num:.15g}"


def check_orthogonality():
    labels = [L for k in range(3) for L in enumerate_labels(2, k, 2)]
    fns = {L: build_eigenfunction(L).fn for L in labels}
    for i, L in enumerate(labels):
        for M in labels[i:]:
            ip = inner_exact(fns[L], fns[M])
            want = exact_l2_norm_sq(L) if L == M else ExactValue.zero()
            if ip != want:
                return False, f"<{L},{M}> = {ip}"
    return True, f"{len(labels)} labels in n=2"


def check_eigen_equation():
    for n in (1, 2):
        for k in range(4):
            for L in enumerate_labels(n, k, 3):
                f = build_eigenfunction(L).fn
                if apply_L(f) != f * L.eigenvalue():
                    return False, str(L)
    return True, "n<=2, |alpha|<=3, |beta|<=3"


def check_radial_closed_forms():
    for n in (1, 2, 3):
        for k in range(6):
            f = build_radial(n, k)
            at0, nsq = radial_closed_forms(n, k)
            if abs(evaluate(f, [0] * n) - float(at0)) > 1e-12 * float(at0):
                return False, f"f_{k}(0) n={n}"
            if inner_exact(f, f) != nsq:
                return False, f"||f_{k}||^2 n={n}"
    return True, "n<=3, k<=5"


def check_kernel_diagonal():
    for n in (1, 2):
        for k in range(5):
            total = ExactValue.zero()
            for a in enumerate_labels(n, k, k):
                if a.alpha == a.beta:
                    f0 = evaluate(build_eigenfunction(a).fn, [0] * n)
                    total = total + ExactValue(Fraction(round(abs(f0) ** 2)), 0) / exact_l2_norm_sq(a)
            if total != kernel_diag_origin(n, k):
                return False, f"n={n} k={k}"
    return True, "sum |f(0)|^2/||f||^2 = binom/pi^n"


def check_expansion_roundtrip():
    g = GaussianFn(CPoly(2, {((2, 1), (0, 3)): 1, ((0, 0), (1, 1)): Fraction(-3, 2)}))
    e = expand(g)
    ok = e.reconstruct() == g and e.l2_norm_sq() == inner_exact(g, g)
    return ok, f"levels {e.levels()}"


def check_exponents():
    worst = 0.0
    for d in (2, 4, 6, 8):
        pc = 2 * (d + 1) / (d - 1)
        worst = max(worst, abs((1 / pc - 0.5) - ((d - 2) / 2 - d / pc)))
    t = theory_exponents(2, 6)
    ok = worst < 1e-14 and abs(t.rho + 1 / 3) < 1e-14 and abs(t.sigma - 1 / 3) < 1e-14
    return ok, f"branch gap {worst:.1e}"


def check_heisenberg():
    g = build_eigenfunction(EigenLabel((1, 0), (0, 1))).fn
    for m in (4, 9):
        for p in (4, 6):
            h = heisenberg_check(g, m, p)
            if not (h["dilation_lp"] and h["dilation_l2"] and h["ratio_law"]):
                return False, f"m={m} p={p}"
    return True, "m in {4,9}, p in {4,6}"


def check_power_b0():
    est = norm_2_to_p_lower_power(1, 3, 4.0, 0)
    ref = candidate_ratio_zbar(1, 3, 4.0)
    return abs(est.value_log - ref.value_log) < 1e-6, f"diff {abs(est.value_log - ref.value_log):.1e}"


def check_two_to_infty():
    est = norm_2_to_infty(2, 3)
    want = 0.5 * (math.log(4) - 2 * math.log(math.pi))
    return abs(est.value_log - want) < 1e-14, f"log norm {est.value_log:.15g}"


CHECKS = [
    ("gamma_formula", check_gamma_formula),
    ("z_gaussian_l4", check_z_gaussian),
    ("orthogonality", check_orthogonality),
    ("eigen_equation", check_eigen_equation),
    ("radial_closed_forms", check_radial_closed_forms),
    ("kernel_diagonal", check_kernel_diagonal),
    ("expansion_roundtrip", check_expansion_roundtrip),
    ("exponent_continuity", check_exponents),
    ("heisenberg_scaling", check_heisenberg),
    ("power_iteration_b0", check_power_b0),
    ("two_to_infty", check_two_to_infty),
]


def run_all() -> list[tuple[str, bool, str]]:
    out = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # report, do not abort the suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))
    return out
