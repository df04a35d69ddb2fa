"""Acceptance criteria 1-12.  Each test prints one PASS/FAIL line; the lines are
also collected into the pytest terminal summary."""

import collections
import contextlib
import math
import random
import time
from fractions import Fraction

import numpy as np

from conftest import ACCEPTANCE_LINES, random_gfn
from twistlap.asymptotics import dispersive_check, heisenberg_check, scale_eigenfunction
from twistlap.eigenbasis import (
    EigenLabel,
    build_eigenfunction,
    build_radial,
    exact_l2_norm_sq,
    radial_closed_forms,
)
from twistlap.hermite_core import CPoly, GaussianFn, apply_L, evaluate, ladder_lower, ladder_raise, multi_indices
from twistlap.moments import ExactValue, inner_exact, lp_norm_exact_even
from twistlap.opnorm import (
    candidate_ratio_radial,
    candidate_ratio_zbar,
    norm_2_to_infty,
    norm_2_to_p_lower_power,
)
from twistlap.projection import expand, kernel_diag_origin, project
from twistlap.quadrature import QuadSpec, lp_norm_numeric


@contextlib.contextmanager
def criterion(num: int, title: str, budget_s: float):
    info = {"detail": ""}
    start = time.perf_counter()
    ok = False
    try:
        yield info
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        within = elapsed < budget_s
        status = "PASS" if ok and within else "FAIL"
        note = info["detail"] if ok else "assertion failed"
        if ok and not within:
            note += f"; over time budget {budget_s:g}s"
        line = f"CRITERION {num}: {status} {title} ({elapsed:.2f}s) {note}".rstrip()
        print(line)
        ACCEPTANCE_LINES.append(line)
    assert elapsed < budget_s, f"criterion {num} took {elapsed:.1f}s, budget {budget_s}s"


def fit_slope(x, y) -> float:
    return float(np.polyfit(np.asarray(x, float), np.asarray(y, float), 1)[0])


def dyadic(lo, hi):
    return [2**j for j in range(40) if lo <= 2**j <= hi]


def zk(n, k):
    return GaussianFn.monomial((k,) + (0,) * (n - 1), (0,) * n)


def gamma_formula(n, k, p):
    s = k * p // 2
    return ExactValue(Fraction(2, p) ** n * Fraction(2, p) ** s * math.factorial(s), n)


def labels_up_to(n, top):
    idx = [a for m in range(top + 1) for a in multi_indices(n, m)]
    return [EigenLabel(a, b) for a in idx for b in idx]


def test_criterion_01_gamma_formula_exact():
    with criterion(1, "exact Gamma formula, d in {2,4}, k<=15, p in {2,4,6}", 1.0) as info:
        count = 0
        for n in (1, 2):
            for k in range(16):
                for p in (2, 4, 6):
                    assert lp_norm_exact_even(zk(n, k), p) == gamma_formula(n, k, p)
                    count += 1
        info["detail"] = f"{count} exact equalities"


def test_criterion_02_quadrature_oracle():
    with criterion(2, "quadrature matches Gamma formula to 1e-6; p=10/3 resolution-stable", 60.0) as info:
        worst = 0.0
        for n in (1, 2):
            for k in range(16):
                for p in (2, 4, 6):
                    exact = float(gamma_formula(n, k, p))
                    num = lp_norm_numeric(zk(n, k), p).value ** p
                    worst = max(worst, abs(num - exact) / exact)
        assert worst < 1e-6
        fine = QuadSpec(radial_nodes=64, angular_nodes=64)
        worst_c = 0.0
        for k in range(16):
            a = lp_norm_numeric(zk(2, k), 10 / 3).value
            b = lp_norm_numeric(zk(2, k), 10 / 3, spec=fine).value
            worst_c = max(worst_c, abs(a - b) / b)
        assert worst_c < 1e-6
        info["detail"] = f"max rel err {worst:.1e}; p=10/3 doubling change {worst_c:.1e}"


def test_criterion_03_l2_norms_and_orthogonality():
    with criterion(3, "inner_exact norms pi^n a!b! and exact orthogonality, |a|,|b|<=5, n<=3", 60.0) as info:
        labels = [lab for n in (1, 2, 3) for lab in labels_up_to(n, 5)]
        fns = {lab: build_eigenfunction(lab).fn for lab in labels}
        for lab in labels:
            assert inner_exact(fns[lab], fns[lab]) == exact_l2_norm_sq(lab)
        # labels with different charge beta - alpha share no z/zbar exponent difference,
        # so their moments vanish term by term; check the structure, then sample exactly
        groups = collections.defaultdict(list)
        for lab in labels:
            charge = tuple(b - a for a, b in zip(lab.alpha, lab.beta))
            for a, b in fns[lab].poly:
                assert tuple(x - y for x, y in zip(a, b)) == charge
            groups[(lab.n, charge)].append(lab)
        within = 0
        for members in groups.values():
            for i in range(len(members)):
                for j in range(i + 1, len(members)):
                    assert inner_exact(fns[members[i]], fns[members[j]]).is_zero()
                    within += 1
        rng = random.Random(0)
        by_n = collections.defaultdict(list)
        for lab in labels:
            by_n[lab.n].append(lab)
        sampled = 0
        while sampled < 3000:
            pool = by_n[rng.randint(1, 3)]
            x, y = rng.choice(pool), rng.choice(pool)
            if x != y:
                assert inner_exact(fns[x], fns[y]).is_zero()
                sampled += 1
        info["detail"] = f"{len(labels)} norms; {within} same-charge pairs; {sampled} sampled pairs"


def test_criterion_04_eigen_identity_and_commutator():
    with criterion(4, "apply_L eigen-identity and [D,D*]=4 on 200 random polynomials", 60.0) as info:
        labels = [lab for n in (1, 2, 3) for lab in labels_up_to(n, 5)]
        for lab in labels:
            f = build_eigenfunction(lab).fn
            assert apply_L(f) == f * (lab.n + 2 * lab.k)
        rng = random.Random(4)
        for _ in range(200):
            n = rng.randint(1, 3)
            g = random_gfn(rng, n, 6)
            j = rng.randint(1, n)
            Dstar = lambda h: ladder_raise(h, j) * -2  # noqa: E731
            D = lambda h: ladder_lower(h, j)  # noqa: E731
            assert D(Dstar(g)) - Dstar(D(g)) == g * 4
        info["detail"] = f"{len(labels)} eigenfunctions, 200 commutators"


def test_criterion_05_radial_closed_forms():
    with criterion(5, "f_k(0) and ||f_k||^2 closed forms, k<=10, n<=3", 60.0) as info:
        for n in (1, 2, 3):
            for k in range(11):
                dim = math.comb(n + k - 1, k)
                at0, nsq = radial_closed_forms(n, k)
                assert at0 == ExactValue(Fraction(math.factorial(k) * dim, 4**k))
                assert nsq == ExactValue(Fraction(math.factorial(k) ** 2 * dim, 16**k), n)
                f = build_radial(n, k)
                v = evaluate(f, [0] * n)
                assert abs(v - float(at0)) <= 1e-12 * float(at0)
                assert inner_exact(f, f) == nsq
        info["detail"] = "33 (n,k) pairs exact; evaluate agrees to 1e-12"


def test_criterion_06_two_to_infty_exponent():
    with criterion(6, "2->inf slope vs log lambda is (d-2)/2 within 0.02, d in {2,4,6}", 1.0) as info:
        ks = dyadic(2**4, 2**12)
        parts = []
        for d in (2, 4, 6):
            n = d // 2
            # sqrt of the exact kernel diagonal, in log space
            y = [0.5 * kernel_diag_origin(n, k).log() for k in ks]
            assert y == [norm_2_to_infty(n, k).value_log for k in ks]
            s = fit_slope([0.5 * math.log(n + 2 * k) for k in ks], y)
            assert abs(s - (d - 2) / 2) < 0.02
            parts.append(f"d={d}: {s:.4f}")
        info["detail"] = "; ".join(parts)


def test_criterion_07_zbar_exponent():
    with criterion(7, "zbar^k slope vs log k is (1/p-1/2)/2 within 0.01, p in {4,6,10/3}", 1.0) as info:
        ks = dyadic(10**2, 10**4)
        parts = []
        for p in (4, 6, 10 / 3):
            y = [candidate_ratio_zbar(1, k, p).value_log for k in ks]
            s = fit_slope(np.log(ks), y)
            want = 0.5 * (1 / p - 0.5)
            assert abs(s - want) < 0.01
            parts.append(f"p={p:.4g}: {s:.5f} (theory {want:.5f})")
        info["detail"] = "; ".join(parts)


def test_criterion_08_radial_exponent():
    with criterion(8, "radial slope is -d/(2p)+(d-2)/4 within 0.05, d in {2,4}, p in {8,16}, k<=100", 300.0) as info:
        ks = dyadic(2**4, 100)
        parts = []
        for d in (2, 4):
            for p in (8, 16):
                y = [candidate_ratio_radial(d // 2, k, p).value_log for k in ks]
                s = fit_slope(np.log(ks), y)
                want = -d / (2 * p) + (d - 2) / 4
                assert abs(s - want) < 0.05
                parts.append(f"d={d},p={p}: {s:.4f} (theory {want:.4f})")
        info["detail"] = f"k={ks}; " + "; ".join(parts)


def test_criterion_09_projection_algebra():
    with criterion(9, "idempotence, self-adjointness, completeness, Parseval on 100 random inputs", 60.0) as info:
        rng = random.Random(9)
        for _ in range(100):
            n = rng.randint(1, 2)
            g = random_gfn(rng, n, 8, max_terms=4)
            h = random_gfn(rng, n, 8, max_terms=4)
            exp_g = expand(g)
            assert exp_g.reconstruct() == g
            total = GaussianFn(CPoly.zero(n))
            parseval = ExactValue.zero()
            for k in range(9):
                pk = project(g, k)
                assert project(pk, k) == pk
                assert project(pk, (k + 1) % 9).is_zero() or pk.is_zero()
                assert inner_exact(pk, h) == inner_exact(g, project(h, k))
                total = total + pk
                parseval = parseval + inner_exact(pk, pk)
            assert total == g
            assert parseval == inner_exact(g, g) == exp_g.l2_norm_sq()
        info["detail"] = "100 random polynomial-Gaussians of degree <= 8"


def test_criterion_10_dispersive_bound():
    with criterion(10, "dispersive ratio sup shows no growth in d=2, k in {4..64}", 600.0) as info:
        rep = dispersive_check(1, [4, 8, 16, 32, 64], seed=0)
        assert not rep.failures
        assert rep.slope_log_sup < 0.05
        sups = ", ".join(f"{k}:{v:.4f}" for k, v in sorted(rep.sup_by_k.items()))
        info["detail"] = f"empirical constant {rep.sup:.4f}; log-sup slope {rep.slope_log_sup:.2e}; sup by k {sups}"


def test_criterion_11_heisenberg_scaling():
    with criterion(11, "dilation law as exact ExactValue equality, m in {4,9}, p in {4,6}", 1.0) as info:
        fns = [
            build_eigenfunction(EigenLabel((2,), (1,))).fn,
            build_eigenfunction(EigenLabel((1, 0), (0, 2))).fn,
            build_radial(2, 2),
        ]
        for g in fns:
            for m in (4, 9):
                for p in (4, 6):
                    h = heisenberg_check(g, m, p)
                    assert h["dilation_lp"] and h["dilation_l2"] and h["ratio_law"]
                    # Lp/L2 ratio grows by |m|^sigma(p); raised to 2p it is rational
                    s = scale_eigenfunction(g, m)
                    lhs = (lp_norm_exact_even(s, p) ** 2 * inner_exact(g, g) ** p) / (
                        lp_norm_exact_even(g, p) ** 2 * inner_exact(s, s) ** p
                    )
                    assert lhs == ExactValue(Fraction(m) ** round(2 * p * h["sigma"]))
        info["detail"] = "3 functions x 4 (m,p) pairs"


def test_criterion_12_power_iteration():
    with criterion(12, "power iteration: B=0 equals zbar to 1e-6, monotone, B=2 >= B=0", 300.0) as info:
        worst = 0.0
        for n, k, p in [(1, 2, 4.0), (1, 3, 6.0), (1, 5, 4.0), (2, 2, 4.0), (2, 3, 6.0)]:
            b0 = norm_2_to_p_lower_power(n, k, p, 0)
            worst = max(worst, abs(b0.value_log - candidate_ratio_zbar(n, k, p).value_log))
            assert worst < 1e-6
        for n, k, p, kw in [(1, 3, 6.0, {}), (1, 6, 4.0, {}), (2, 2, 4.0, {"restarts": 1, "max_iter": 25})]:
            b0 = norm_2_to_p_lower_power(n, k, p, 0)
            b2 = norm_2_to_p_lower_power(n, k, p, 2, **kw)
            assert np.all(np.diff(b2.history) >= -1e-8)
            assert b2.value_log >= b0.value_log - b2.tolerance
        info["detail"] = f"max |B=0 - zbar| {worst:.1e}"


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                pass
