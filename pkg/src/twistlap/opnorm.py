"""Estimates of the 2 -> p operator norm of the spectral projections P_lambda.

All values are carried as natural logs.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .eigenbasis import EigenLabel, build_eigenfunction, enumerate_labels
from .hermite_core import GaussianFn
from .projection import kernel_diag_origin
from .quadrature import (
    FULL_SPACE,
    QuadSpec,
    _gl_composite,
    _tail_radius,
    as_evaluator,
    lp_norm_numeric,
    radial_eigen_evaluator,
)

logger = logging.getLogger(__name__)

__all__ = [
    "Kind",
    "NormEstimate",
    "norm_2_to_infty",
    "candidate_ratio_zbar",
    "candidate_ratio_radial",
    "norm_2_to_p_lower_power",
    "PowerGrid",
]


class Kind(str, enum.Enum):
    EXACT = "Exact"
    CANDIDATE = "CandidateLowerBound"
    POWER = "PowerIterationLowerBound"


@dataclass(frozen=True)
class NormEstimate:
    value_log: float
    kind: Kind
    n: int
    k: int
    p: float
    B: int | None = None
    iterations: int = 0
    tolerance: float = 0.0
    seed: int | None = None
    converged: bool = True
    history: tuple = field(default=(), repr=False)

    @property
    def value(self) -> float:
        return math.exp(self.value_log)

    @property
    def lam(self) -> float:
        return math.sqrt(self.n + 2 * self.k)

    def csv_row(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "p": _fmt_p(self.p),
            "B": "" if self.B is None else self.B,
            "kind": self.kind.value,
            "value_log": repr(self.value_log),
            "iterations": self.iterations,
            "seed": "" if self.seed is None else self.seed,
        }


CSV_FIELDS = ["n", "k", "p", "B", "kind", "value_log", "iterations", "seed"]


def _fmt_p(p: float) -> str:
    if math.isinf(p):
        return "inf"
    return repr(float(p))


def norm_2_to_infty(n: int, k: int) -> NormEstimate:
    """Exact ``||P_lambda||_{2->inf} = sqrt(K(0,0)) = pi^(-n/2) sqrt(binom(n+k-1, k))``."""
    return NormEstimate(0.5 * kernel_diag_origin(n, k).log(), Kind.EXACT, n, k, math.inf)


def candidate_ratio_zbar(n: int, k: int, p: float) -> NormEstimate:
    """``log(||zbar_1^k e^{-|z|^2/2}||_p / ||.||_2)`` from the Gamma-function formula."""
    if not p >= 1:
        raise ValueError(f"need p >= 1, got {p}")
    log_l2 = 0.5 * (n * math.log(math.pi) + math.lgamma(k + 1))
    if math.isinf(p):
        log_lp = 0.0 if k == 0 else 0.5 * k * (math.log(k) - 1)
    else:
        s = k * p / 2
        log_lp = (n * math.log(2 * math.pi / p) + s * math.log(2 / p) + math.lgamma(s + 1)) / p
    return NormEstimate(log_lp - log_l2, Kind.CANDIDATE, n, k, p, B=0)


def candidate_ratio_radial(n: int, k: int, p: float, spec: QuadSpec | None = None) -> NormEstimate:
    """``log(||f_k||_p / ||f_k||_2)`` with the L^p norm by radial quadrature."""
    if not p >= 1:
        raise ValueError(f"need p >= 1, got {p}")
    # f_k normalised to f_k(0) = 1 has ||.||_2^2 = pi^n / binom(n+k-1, k)
    log_l2 = 0.5 * (n * math.log(math.pi) - math.log(math.comb(n + k - 1, k)))
    if math.isinf(p):
        log_lp = 0.0
    else:
        log_lp = math.log(lp_norm_numeric(radial_eigen_evaluator(n, k), p, FULL_SPACE, spec).value)
    return NormEstimate(log_lp - log_l2, Kind.CANDIDATE, n, k, p, B=k)


# ---------------------------------------------------------------------------
# nonlinear power iteration


class PowerGrid:
    """Fixed product quadrature grid carrying the normalized level-k basis.

    Each basis function factorizes as ``prod_j phi_{alpha_j, beta_j}(z_j)``; the
    per-coordinate factors are tabulated on a polar rule in each z_j.
    """

    def __init__(self, n: int, k: int, B: int, p: float, spec: QuadSpec, level: int = 0):
        if n not in (1, 2):
            raise ValueError(f"power iteration grid supports n in (1, 2), got {n}")
        self.n, self.k, self.B, self.p = n, k, B, p
        self.labels = enumerate_labels(n, k, B)
        top = GaussianFn.monomial((B,), (k,))
        R = _tail_radius(as_evaluator(top), 2.0, 2, spec)
        nr = spec.radial_nodes * 2**level
        # per-coordinate frequencies of f_v lie in [-k, B]; for even p the integrands
        # |f|^p and |f|^{p-2} f conj(e) have degree <= (p/2 + 1)(k + B), which the
        # trapezoid rule integrates exactly, so only odd or fractional p need doubling
        nt = max(spec.angular_nodes, int(math.ceil((p / 2 + 1) * (k + B))) + 2)
        if not (float(p).is_integer() and int(p) % 2 == 0):
            nt *= 2**level
        r, wr = _gl_composite(0.0, R, nr, spec.panel_order)
        th = 2 * np.pi * np.arange(nt) / nt
        self.z = (r[:, None] * np.exp(1j * th)[None, :]).ravel()
        self.w = ((wr * r)[:, None] * np.full(nt, 2 * np.pi / nt)[None, :]).ravel()
        self.nodes = (nr, nt)
        self.radius = R
        # normalized 1-D factors, keyed by (alpha_j, beta_j)
        pairs = sorted({(a, b) for L in self.labels for a, b in zip(L.alpha, L.beta)})
        row = {pair: i for i, pair in enumerate(pairs)}
        table = np.empty((len(pairs), len(self.z)), dtype=complex)
        for (a, b), i in row.items():
            f = build_eigenfunction(EigenLabel((a,), (b,))).fn
            norm = math.sqrt(math.pi * math.factorial(a) * math.factorial(b))
            table[i] = as_evaluator(f).func(self.z[:, None]) / norm
        self.factors = [
            table[[row[(L.alpha[j], L.beta[j])] for L in self.labels]] for j in range(n)
        ]
        self.gram = self._gram()

    def field(self, v: np.ndarray) -> np.ndarray:
        """Values of ``sum_L v_L e_L`` on the grid (vector for n=1, matrix for n=2)."""
        if self.n == 1:
            return v @ self.factors[0]
        return (self.factors[0] * v[:, None]).T @ self.factors[1]

    def integrate(self, vals) -> complex:
        if self.n == 1:
            return complex(self.w @ vals)
        # product weights are applied factor by factor, never as an N x N array
        return complex(self.w @ vals @ self.w)

    def project_coeffs(self, vals) -> np.ndarray:
        """``b_L = <vals, e_L>`` in the grid inner product."""
        if self.n == 1:
            return (np.conj(self.factors[0]) * self.w) @ vals
        X = (np.conj(self.factors[0]) * self.w) @ vals
        return np.sum(X * (np.conj(self.factors[1]) * self.w), axis=1)

    def _gram(self) -> np.ndarray:
        G = np.ones((len(self.labels),) * 2, dtype=complex)
        for F in self.factors:
            G *= (np.conj(F) * self.w) @ F.T
        return G

    @staticmethod
    def _pow(a2, e: float):
        return a2 ** int(e) if float(e).is_integer() else a2**e

    def l2(self, v) -> float:
        return math.sqrt(max((np.conj(v) @ self.gram @ v).real, 0.0))

    def lp_pow(self, v) -> float:
        f = self.field(v)
        return self.integrate(self._pow(f.real**2 + f.imag**2, self.p / 2)).real

    def objective_log(self, v) -> float:
        return math.log(self.lp_pow(v)) / self.p - math.log(self.l2(v))

    def state(self, v):
        """``(objective_log, next coefficients)`` sharing one field evaluation."""
        f = self.field(v)
        a2 = f.real**2 + f.imag**2
        w = self._pow(a2, (self.p - 2) / 2)
        obj = math.log(self.integrate(w * a2).real) / self.p - math.log(self.l2(v))
        w = w * f  # |f|^{p-2} f
        return obj, np.linalg.solve(self.gram, self.project_coeffs(w))


def _select_grid(n, k, B, p, spec, probe):
    prev = None
    for level in range(spec.max_doublings + 1):
        grid = PowerGrid(n, k, B, p, spec, level)
        ortho = np.max(np.abs(grid.gram - np.eye(len(grid.labels))))
        val = grid.objective_log(probe)
        if prev is not None and abs(val - prev) <= spec.target_rel_err and ortho < 1e-9:
            return grid
        prev = val
    raise RuntimeError(f"power-iteration grid did not resolve n={n}, k={k}, B={B}, p={p}")


def _warm_starts(labels: list[EigenLabel], n: int, k: int) -> list[np.ndarray]:
    starts = []
    idx = {L: i for i, L in enumerate(labels)}
    zbar = EigenLabel((k,) + (0,) * (n - 1), (0,) * n)
    if zbar in idx:
        v = np.zeros(len(labels), dtype=complex)
        v[idx[zbar]] = 1
        starts.append(v)
    radial = [EigenLabel(a, a) for a in {L.alpha for L in labels}]
    if all(L in idx for L in radial):
        # f_k has equal weights on the normalized e_{alpha,alpha}
        v = np.zeros(len(labels), dtype=complex)
        for L in radial:
            v[idx[L]] = 1.0
        starts.append(v)
    return starts


def norm_2_to_p_lower_power(
    n: int,
    k: int,
    p: float,
    B: int,
    tol: float = 1e-10,
    max_iter: int = 500,
    spec: QuadSpec | None = None,
    seed: int = 0,
    restarts: int = 5,
) -> NormEstimate:
    """Lower bound for ``||P_lambda||_{2->p}`` by nonlinear power iteration.

    Iterates ``v -> P(|f_v|^{p-2} f_v)`` renormalized in L^2 on the eigenspace
    truncated to ``|beta| <= B``.  The map, projection and norms all use one fixed
    quadrature grid, so the objective ``||f_v||_p / ||f_v||_2`` cannot decrease.
    Warm starts include the zbar_1^k state and, when ``B >= k``, the radial f_k.
    """
    if not (p > 2 and math.isfinite(p)):
        raise ValueError(f"power iteration needs finite p > 2, got {p}")
    if B < 0:
        raise ValueError(f"B must be >= 0, got {B}")
    spec = spec or QuadSpec()
    rng = np.random.default_rng(seed)
    labels = enumerate_labels(n, k, B)
    m = len(labels)
    probe = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    grid = _select_grid(n, k, B, p, spec, probe)
    starts = _warm_starts(labels, n, k)
    starts += [rng.standard_normal(m) + 1j * rng.standard_normal(m) for _ in range(restarts)]

    best = None
    for v in starts:
        v = v / grid.l2(v)
        obj, c = grid.state(v)
        hist = [obj]
        converged = m == 1
        it = 0
        while not converged and it < max_iter:
            it += 1
            v = c / grid.l2(c)
            obj, c = grid.state(v)
            hist.append(obj)
            converged = abs(hist[-1] - hist[-2]) < tol
        if best is None or hist[-1] > best[0]:
            best = (hist[-1], it, converged, tuple(hist))
    value, iters, converged, hist = best
    if not converged:
        logger.warning("power iteration hit max_iter=%d (n=%d k=%d p=%s B=%d)", max_iter, n, k, p, B)
    return NormEstimate(
        value,
        Kind.POWER,
        n,
        k,
        p,
        B=B,
        iterations=iters,
        tolerance=tol,
        seed=seed,
        converged=converged,
        history=hist,
    )
