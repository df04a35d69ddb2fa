import math
from fractions import Fraction

import numpy as np
import pytest

from twistlap import asymptotics
from twistlap.asymptotics import (
    dispersive_check,
    dyadic,
    heisenberg_check,
    scale_eigenfunction,
    scaled_evaluator,
    sweep_fit,
    theory_exponents,
)
from twistlap.eigenbasis import EigenLabel, build_eigenfunction
from twistlap.hermite_core import CPoly, GaussianFn, evaluate
from twistlap.moments import ExactValue, lp_norm_exact_even
from twistlap.quadrature import QuadratureError, lp_norm_numeric


def mono(a, b, c=1, t=1):
    return GaussianFn.monomial(a, b, c, t)


# exponents


def test_theory_d2_critical():
    t = theory_exponents(2, 6)
    assert t.p_critical == 6
    assert t.rho == pytest.approx(-1 / 3, abs=1e-15)
    assert t.sigma == pytest.approx(1 / 3, abs=1e-15)


def test_theory_p2():
    for d in (2, 4, 6):
        t = theory_exponents(d, 2)
        assert t.rho == 0 and t.sigma == 0


def test_theory_d4_critical():
    t = theory_exponents(4, 10 / 3)
    assert t.p_critical == pytest.approx(10 / 3)
    assert t.rho == pytest.approx(-1 / 5, abs=1e-14)


def test_theory_infinity():
    for d in (2, 4, 6):
        t = theory_exponents(d, math.inf)
        assert t.rho == (d - 2) / 2 and t.sigma == d / 4


def test_theory_branches_agree_at_critical():
    for d in (2, 4, 6, 8):
        pc = 2 * (d + 1) / (d - 1)
        assert abs((1 / pc - 0.5) - ((d - 2) / 2 - d / pc)) < 1e-15
        below = theory_exponents(d, pc * (1 - 1e-12)).rho
        above = theory_exponents(d, pc * (1 + 1e-12)).rho
        assert abs(below - above) < 1e-10


@pytest.mark.parametrize("d,p", [(2, 1.5), (3, 4), (0, 4), (2, float("nan"))])
def test_theory_rejects(d, p):
    with pytest.raises(ValueError):
        theory_exponents(d, p)


# sweeps


def test_dyadic():
    assert dyadic(100, 10000) == [128, 256, 512, 1024, 2048, 4096, 8192]
    assert dyadic(1, 1) == [1]
    with pytest.raises(ValueError):
        dyadic(0, 4)


def test_sweep_zbar_p4():
    fit = sweep_fit("zbar", 1, 4, dyadic(100, 10000), "log-k")
    assert abs(fit.slope + 1 / 8) < 0.01


def test_sweep_two_to_infty_d6():
    fit = sweep_fit("twoinfty", 3, math.inf, dyadic(16, 4096), "log-lambda")
    assert abs(fit.slope - 2) < 0.02


def test_sweep_radial_d2_p8():
    fit = sweep_fit("radial", 1, 8, dyadic(4, 64), "log-k")
    assert abs(fit.slope + 1 / 8) < 0.05


def test_fit_residual_orthogonal_to_regressors():
    fit = sweep_fit("zbar", 2, 6, dyadic(4, 512), "log-lambda")
    x = np.array([r.log_lambda for r in fit.rows])
    res = np.array([r.value_log - fit.fitted(r) for r in fit.rows])
    assert abs(res.sum()) < 1e-10
    assert abs(res @ x) < 1e-10


def test_log_lambda_slope_is_twice_log_k_slope_asymptotically():
    ks = dyadic(2**14, 2**20)
    a = sweep_fit("zbar", 1, 4, ks, "log-k").slope
    b = sweep_fit("zbar", 1, 4, ks, "log-lambda").slope
    assert b == pytest.approx(2 * a, rel=1e-3)


def test_threads_reproduce_serial():
    a = sweep_fit("radial", 1, 6, dyadic(2, 32), threads=1)
    b = sweep_fit("radial", 1, 6, dyadic(2, 32), threads=4)
    assert a.rows == b.rows and a.slope == b.slope


def test_failed_rows_are_skipped_and_reported(monkeypatch):
    real = asymptotics._estimate

    def flaky(candidate, n, k, p, spec, B, seed):
        if k == 16:
            raise QuadratureError("forced")
        return real(candidate, n, k, p, spec, B, seed)

    monkeypatch.setattr(asymptotics, "_estimate", flaky)
    fit = sweep_fit("zbar", 1, 4, [4, 8, 16, 32])
    assert [r.k for r in fit.rows] == [4, 8, 32]
    assert fit.skipped == ((16, "forced"),)


def test_sweep_validation():
    with pytest.raises(ValueError):
        sweep_fit("zbar", 1, 4, [])
    with pytest.raises(ValueError):
        sweep_fit("zbar", 1, 4, [4, 8], regressor="log-p")
    with pytest.raises(ValueError):
        sweep_fit("nonsense", 1, 4, [4, 8])


# dispersive check


def test_dispersive_ground_state_closed_form():
    rep = dispersive_check(1, [0], centers=[0])
    row = next(r for r in rep.rows if r.function == "f_0")
    # lambda = 1: (int_{B_1} e^{-3r^2})^{1/6} / (int_{B_2} e^{-r^2})^{1/2}
    top = (math.pi / 3 * (1 - math.exp(-3))) ** (1 / 6)
    bottom = math.sqrt(math.pi * (1 - math.exp(-4)))
    assert row.ratio == pytest.approx(top / bottom, rel=1e-8)


def test_dispersive_outer_ball_monotone():
    small = dispersive_check(1, [2, 4], seed=1, n_angles=1)
    large = dispersive_check(1, [2, 4], seed=1, n_angles=1, outer_factor=4.0)
    assert len(small.rows) == len(large.rows)
    for a, b in zip(small.rows, large.rows):
        assert (a.k, a.function, a.center) == (b.k, b.function, b.center)
        assert b.ratio <= a.ratio * (1 + 1e-9)


def test_dispersive_table_shape():
    rep = dispersive_check(1, [3], seed=0, n_angles=2)
    # 5 functions x (origin + 2 circle points)
    assert len(rep.rows) == 15 and not rep.failures
    assert rep.sup == max(r.ratio for r in rep.rows)
    lam = math.sqrt(7)
    circle = [r.center for r in rep.rows if r.center != ((0.0, 0.0),)]
    for c in circle:
        assert math.hypot(*c[0]) == pytest.approx(lam)


# scaling


def test_scale_identity():
    g = build_eigenfunction(EigenLabel((1, 2), (0, 1))).fn
    assert scale_eigenfunction(g, 1) == g


def test_scale_by_four():
    assert scale_eigenfunction(mono((0,), (1,)), 4) == mono((0,), (1,), 2, t=4)


def test_scale_negative_conjugates():
    g = mono((2,), (1,), 3)
    assert scale_eigenfunction(g, -9) == scale_eigenfunction(g, 9).conj()


def test_scale_rejects():
    with pytest.raises(ValueError):
        scale_eigenfunction(mono((0,), (0,)), 2)
    with pytest.raises(ValueError):
        scale_eigenfunction(mono((0,), (0,)), 0)


def test_scale_pointwise():
    g = build_eigenfunction(EigenLabel((2,), (1,))).fn
    s = scale_eigenfunction(g, 9)
    for z in (0.3 + 0.1j, -0.5j, 0.2):
        assert evaluate(s, [z]) == pytest.approx(evaluate(g, [3 * z]), rel=1e-13, abs=1e-15)


@pytest.mark.parametrize("m", [4, 9, -4])
@pytest.mark.parametrize("p", [4, 6])
def test_scale_lp_law_exact(m, p):
    g = build_eigenfunction(EigenLabel((1, 1), (0, 2))).fn
    s = scale_eigenfunction(g, m)
    n = g.n
    assert lp_norm_exact_even(s, p) == lp_norm_exact_even(g, p) * Fraction(1, abs(m) ** n)


@pytest.mark.parametrize("m", [4, 9])
@pytest.mark.parametrize("p", [4, 6])
def test_heisenberg_check(m, p):
    g = build_eigenfunction(EigenLabel((2,), (1,))).fn
    h = heisenberg_check(g, m, p)
    assert h["dilation_lp"] and h["dilation_l2"] and h["ratio_law"]
    assert h["ratio_law_rhs"] == ExactValue(m ** (p - 2))
    assert h["ratio_exponent"] == pytest.approx(p - 2)


def test_scaled_evaluator_matches_exact_and_law():
    g = build_eigenfunction(EigenLabel((1,), (1,))).fn
    exact = scale_eigenfunction(g, 4)
    ev = scaled_evaluator(g, 4)
    Z = np.array([[0.2 + 0.3j], [1.0 - 0.4j]])
    np.testing.assert_allclose(ev(Z), evaluate(exact, Z), rtol=1e-13)
    # non-square m only at evaluator level: ||u(sqrt(m) .)||_p = m^{-n/p} ||u||_p
    # (u has no zero circle, so |u|^p stays smooth for odd p)
    u = build_eigenfunction(EigenLabel((2,), (0,))).fn
    for p in (3.0, 4.0):
        a = lp_norm_numeric(scaled_evaluator(u, 2), p).value
        b = lp_norm_numeric(u, p).value
        assert a == pytest.approx(2 ** (-1 / p) * b, rel=1e-8)
    with pytest.raises(ValueError):
        scaled_evaluator(g, 0)
