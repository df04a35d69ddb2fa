"""Theoretical exponents, log-log sweep fits, the local dispersive check and dilation scaling."""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .eigenbasis import EigenLabel, build_eigenfunction, enumerate_labels, exact_l2_norm_sq
from .hermite_core import CQ, CPoly, GaussianFn
from .moments import ExactValue, lp_norm_exact_even
from .opnorm import (
    NormEstimate,
    candidate_ratio_radial,
    candidate_ratio_zbar,
    norm_2_to_infty,
    norm_2_to_p_lower_power,
)
from .quadrature import (
    Ball,
    Evaluator,
    QuadratureError,
    QuadSpec,
    as_evaluator,
    lp_norm_numeric,
    radial_eigen_evaluator,
)

__all__ = [
    "ExponentTheory",
    "theory_exponents",
    "Candidate",
    "SweepRow",
    "FitResult",
    "dyadic",
    "sweep_fit",
    "DispersiveRow",
    "DispersiveReport",
    "dispersive_check",
    "scale_eigenfunction",
    "scaled_evaluator",
    "heisenberg_check",
]


@dataclass(frozen=True)
class ExponentTheory:
    d: int
    p: float
    rho: float
    sigma: float
    p_critical: float


def theory_exponents(d: int, p: float) -> ExponentTheory:
    """Sharp exponent rho(p) of ||P_lambda||_{2->p}, its Heisenberg companion sigma(p), and p_c."""
    if d < 2 or d % 2:
        raise ValueError(f"d must be even and >= 2, got {d}")
    if not p >= 2:
        raise ValueError(f"need p in [2, inf], got {p}")
    pc = 2 * (d + 1) / (d - 1)
    inv = 0.0 if math.isinf(p) else 1 / p
    rho = inv - 0.5 if p <= pc else (d - 2) / 2 - d * inv
    return ExponentTheory(d=d, p=p, rho=rho, sigma=d / 2 * (0.5 - inv), p_critical=pc)


class Candidate(str, enum.Enum):
    ZBAR = "zbar"
    RADIAL = "radial"
    TWO_TO_INFTY = "twoinfty"
    POWER = "power"


@dataclass(frozen=True)
class SweepRow:
    k: int
    lam: float
    value_log: float

    @property
    def log_lambda(self) -> float:
        return math.log(self.lam)


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    residual: float
    rows: tuple
    regressor: str
    skipped: tuple = ()
    meta: dict = field(default_factory=dict)

    def x(self, row: SweepRow) -> float:
        return math.log(row.k) if self.regressor == "log-k" else row.log_lambda

    def fitted(self, row: SweepRow) -> float:
        return self.intercept + self.slope * self.x(row)


def dyadic(lo: int, hi: int) -> list[int]:
    """Powers of two in ``[lo, hi]``."""
    if lo < 1 or hi < lo:
        raise ValueError(f"bad dyadic range [{lo}, {hi}]")
    out, k = [], 1
    while k <= hi:
        if k >= lo:
            out.append(k)
        k *= 2
    return out


def _estimate(candidate: Candidate, n, k, p, spec, B, seed) -> NormEstimate:
    if candidate is Candidate.ZBAR:
        return candidate_ratio_zbar(n, k, p)
    if candidate is Candidate.RADIAL:
        return candidate_ratio_radial(n, k, p, spec)
    if candidate is Candidate.TWO_TO_INFTY:
        return norm_2_to_infty(n, k)
    return norm_2_to_p_lower_power(n, k, p, B, spec=spec, seed=seed)


def sweep_fit(
    candidate,
    n: int,
    p: float,
    ks,
    regressor: str = "log-lambda",
    spec: QuadSpec | None = None,
    B: int = 2,
    seed: int = 0,
    threads: int = 1,
) -> FitResult:
    """Least-squares slope of ``value_log`` against ``log k`` or ``log lambda``.

    With ``log-lambda`` the slope is twice the k-exponent since lambda^2 = n + 2k.
    Rows whose quadrature fails are dropped and listed in ``skipped``.
    """
    candidate = Candidate(candidate)
    if regressor not in ("log-k", "log-lambda"):
        raise ValueError(f"regressor must be 'log-k' or 'log-lambda', got {regressor!r}")
    ks = sorted(set(int(k) for k in ks))
    if not ks:
        raise ValueError("empty k range")
    if regressor == "log-k" and ks[0] < 1:
        raise ValueError("log-k regression needs k >= 1")

    def one(k):
        try:
            return _estimate(candidate, n, k, p, spec, B, seed)
        except QuadratureError as exc:
            return exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, ks))
    else:
        results = [one(k) for k in ks]
    rows, skipped = [], []
    for k, res in zip(ks, results):
        if isinstance(res, Exception):
            skipped.append((k, str(res)))
        else:
            rows.append(SweepRow(k, math.sqrt(n + 2 * k), res.value_log))
    if len(rows) < 2:
        raise ValueError(f"need at least two successful rows to fit, got {len(rows)}")
    x = np.array([math.log(r.k) if regressor == "log-k" else r.log_lambda for r in rows])
    y = np.array([r.value_log for r in rows])
    X = np.stack([np.ones_like(x), x], axis=1)
    (intercept, slope), *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ np.array([intercept, slope])
    return FitResult(
        slope=float(slope),
        intercept=float(intercept),
        residual=float(np.sqrt(np.mean(resid**2))),
        rows=tuple(rows),
        regressor=regressor,
        skipped=tuple(skipped),
        meta={"candidate": candidate.value, "n": n, "p": p, "B": B, "seed": seed},
    )


# ---------------------------------------------------------------------------
# local dispersive estimate


@dataclass(frozen=True)
class DispersiveRow:
    k: int
    lam: float
    function: str
    center: tuple  # (re, im) per coordinate
    ratio: float
    rel_err: float


@dataclass(frozen=True)
class DispersiveReport:
    rows: tuple
    sup_by_k: dict
    sup: float
    slope_log_sup: float
    failures: tuple = ()


def _random_eigen_element(n: int, k: int, B: int, rng) -> GaussianFn:
    out = GaussianFn(CPoly.zero(n))
    for label in enumerate_labels(n, k, B):
        c = complex(rng.standard_normal(), rng.standard_normal())
        # weight so the coefficient vector is random in the orthonormal basis
        norm = math.sqrt(float(exact_l2_norm_sq(label)))
        c /= norm
        out = out + build_eigenfunction(label).fn * CQ(Fraction(c.real), Fraction(c.imag))
    return out


def _family(n: int, k: int, rng, B: int) -> list[tuple[str, Evaluator]]:
    zbar = build_eigenfunction(EigenLabel((k,) + (0,) * (n - 1), (0,) * n)).fn
    fam = [
        (f"f_{k}", radial_eigen_evaluator(n, k)),
        (f"zbar1^{k}", as_evaluator(zbar)),
    ]
    for i in range(3):
        fam.append((f"random{i}", as_evaluator(_random_eigen_element(n, k, B, rng))))
    return fam


def _centers(n: int, k: int, n_angles: int) -> list[np.ndarray]:
    lam = math.sqrt(n + 2 * k)
    out = [np.zeros(n, dtype=complex)]
    for j in range(n_angles):
        c = np.zeros(n, dtype=complex)
        c[0] = lam * np.exp(2j * np.pi * j / n_angles)
        out.append(c)
    return out


def dispersive_check(
    n: int,
    k_list,
    spec: QuadSpec | None = None,
    seed: int = 0,
    B: int = 2,
    n_angles: int = 2,
    outer_factor: float = 2.0,
    centers=None,
) -> DispersiveReport:
    """Ratios ``lambda^{1/(d+1)} ||u||_{L^{p_c}(B_lambda(c))} / ||u||_{L^2(B_{f lambda}(c))}``.

    ``u`` runs over f_k, zbar_1^k e^{-|z|^2/2} and three random level-k elements
    with ``|beta| <= B``; centres are 0 and points on the circle of radius lambda
    unless given explicitly.  ``outer_factor`` is the radius ratio of the outer ball.
    """
    spec = spec or QuadSpec()
    d = 2 * n
    pc = 2 * (d + 1) / (d - 1)
    rng = np.random.default_rng(seed)
    rows, failures = [], []
    for k in sorted(k_list):
        lam = math.sqrt(n + 2 * k)
        cs = _centers(n, k, n_angles) if centers is None else [np.atleast_1d(np.asarray(c, dtype=complex)) for c in centers]
        for name, u in _family(n, k, rng, B):
            for c in cs:
                try:
                    top = lp_norm_numeric(u, pc, Ball.around(c, lam), spec)
                    bottom = lp_norm_numeric(u, 2, Ball.around(c, outer_factor * lam), spec)
                except QuadratureError as exc:
                    failures.append((k, name, tuple(c), str(exc)))
                    continue
                ratio = lam ** (1 / (d + 1)) * top.value / bottom.value
                rows.append(
                    DispersiveRow(
                        k=k,
                        lam=lam,
                        function=name,
                        center=tuple((float(z.real), float(z.imag)) for z in c),
                        ratio=ratio,
                        rel_err=top.rel_err + bottom.rel_err,
                    )
                )
    sup_by_k = {}
    for row in rows:
        sup_by_k[row.k] = max(sup_by_k.get(row.k, 0.0), row.ratio)
    ks = sorted(sup_by_k)
    slope = math.nan
    if len(ks) >= 2:
        x = np.log([math.sqrt(n + 2 * k) for k in ks])
        slope = float(np.polyfit(x, np.log([sup_by_k[k] for k in ks]), 1)[0])
    return DispersiveReport(
        rows=tuple(rows),
        sup_by_k=sup_by_k,
        sup=max(sup_by_k.values(), default=math.nan),
        slope_log_sup=slope,
        failures=tuple(failures),
    )


# ---------------------------------------------------------------------------
# dilations


def _isqrt_exact(m: int) -> int | None:
    r = math.isqrt(m)
    return r if r * r == m else None


def scale_eigenfunction(g: GaussianFn, m: int) -> GaussianFn:
    """Exact ``z -> g(sqrt|m| z)``, conjugated when ``m < 0``; needs ``|m|`` a perfect square."""
    if m == 0:
        raise ValueError("m must be nonzero")
    root = _isqrt_exact(abs(m))
    if root is None:
        raise ValueError(f"|m| = {abs(m)} is not a perfect square; use scaled_evaluator")
    terms = {
        (a, b): c * root ** (sum(a) + sum(b)) for (a, b), c in g.poly.terms.items()
    }
    poly = CPoly(g.n, terms)
    if m < 0:
        poly = poly.conj()
    return GaussianFn(poly, g.t * abs(m))


def scaled_evaluator(u, m: int) -> Evaluator:
    """Numeric ``z -> u(sqrt|m| z)`` (conjugated for m < 0) for any nonzero integer m."""
    if m == 0:
        raise ValueError("m must be nonzero")
    ev = as_evaluator(u)
    s = math.sqrt(abs(m))

    def func(Z):
        vals = ev.func(Z * s)
        return np.conj(vals) if m < 0 else vals

    env = None
    if ev.log_envelope is not None:
        base_env = ev.log_envelope

        def env(r):
            return base_env(np.asarray(r) * s)

    radial = None
    if ev.radial is not None:
        prof = ev.radial

        def radial(r):
            vals = prof(np.asarray(r) * s)
            return np.conj(vals) if m < 0 else vals

    return Evaluator(
        n=ev.n,
        func=func,
        center=tuple(ev.center_array / s),
        log_envelope=env,
        scan_radius=ev.scan_radius / s,
        radial=radial,
        angular_degree=ev.angular_degree,
        feature_length=ev.feature_length / s,
    )


def heisenberg_check(g: GaussianFn, m: int, p: int) -> dict:
    """Exact dilation law for even p.

    With ``s = scale_eigenfunction(g, m)`` and ``N_q(.) = ||.||_q^q``:
    ``N_p(s) = |m|^{-n} N_p(g)`` and, for the L^p/L^2 ratio,
    ``N_p(s)^2 N_2(g)^p / (N_p(g)^2 N_2(s)^p) = |m|^{2 p sigma(p)} = |m|^{n (p - 2)}``.
    """
    s = scale_eigenfunction(g, m)
    n, M = g.n, abs(m)
    np_g, np_s = lp_norm_exact_even(g, p), lp_norm_exact_even(s, p)
    n2_g, n2_s = lp_norm_exact_even(g, 2), lp_norm_exact_even(s, 2)
    dil = ExactValue(Fraction(1, M**n))
    lhs = (np_s**2 * n2_g**p) / (np_g**2 * n2_s**p)
    rhs = ExactValue(Fraction(M ** (n * (p - 2))))
    sigma = theory_exponents(2 * n, p).sigma
    return {
        "m": m,
        "p": p,
        "n": n,
        "lp_pow_g": np_g,
        "lp_pow_scaled": np_s,
        "l2_pow_g": n2_g,
        "l2_pow_scaled": n2_s,
        "dilation_lp": np_s == np_g * dil,
        "dilation_l2": n2_s == n2_g * dil,
        "ratio_law_lhs": lhs,
        "ratio_law_rhs": rhs,
        "ratio_law": lhs == rhs,
        "sigma": sigma,
        "ratio_exponent": 2 * p * sigma,
    }
