"""Floating-point L^p norms over R^{2n} and over Euclidean balls.

Integration uses composite Gauss-Legendre rules in radius and the trapezoid
rule in each angle.  Convergence is checked by doubling the node counts until
two successive estimates agree to ``QuadSpec.target_rel_err``.  Angular counts
stay fixed when the trapezoid rule is already exact (even powers of centred
polynomial-Gaussians).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .eigenbasis import radial_profile
from .hermite_core import GaussianFn, _monomial_sum

__all__ = [
    "QuadSpec",
    "FullSpace",
    "Ball",
    "FULL_SPACE",
    "Evaluator",
    "NormResult",
    "QuadratureError",
    "as_evaluator",
    "radial_eigen_evaluator",
    "lp_norm_numeric",
    "integrate_radial",
    "inner_numeric",
    "radial_profile_derivative",
    "sphere_area",
    "half_height_radius",
    "fit_half_height_constant",
]

# integrand cutoff: 40 nats below the envelope peak (~4e-18 relative)
_TAIL_NATS = 40.0
_ERR_FLOOR = 1e-12
_CHUNK = 1 << 18


class QuadratureError(RuntimeError):
    """Doubling test did not converge within the node budget."""


@dataclass(frozen=True)
class QuadSpec:
    radial_nodes: int = 32
    angular_nodes: int = 32
    tail_radius_multiplier: float = 3.0
    target_rel_err: float = 1e-9
    max_doublings: int = 5
    panel_order: int = 16

    def __post_init__(self):
        if self.radial_nodes < 1 or self.angular_nodes < 1 or self.panel_order < 1:
            raise ValueError("node counts must be positive")
        if self.tail_radius_multiplier < 1:
            raise ValueError("tail_radius_multiplier must be >= 1")
        if not self.target_rel_err > 0:
            raise ValueError("target_rel_err must be positive")

    def to_dict(self) -> dict:
        return {
            "radial_nodes": self.radial_nodes,
            "angular_nodes": self.angular_nodes,
            "tail_radius_multiplier": self.tail_radius_multiplier,
            "target_rel_err": self.target_rel_err,
            "max_doublings": self.max_doublings,
            "panel_order": self.panel_order,
        }


@dataclass(frozen=True)
class FullSpace:
    pass


@dataclass(frozen=True)
class Ball:
    center: tuple  # point of R^{2n} as (x_1..x_n, y_1..y_n)
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"ball radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @classmethod
    def around(cls, c, radius: float) -> "Ball":
        """Ball centred at a point of C^n."""
        c = np.atleast_1d(np.asarray(c, dtype=complex))
        return cls(tuple(c.real) + tuple(c.imag), radius)

    def complex_center(self) -> np.ndarray:
        n = len(self.center) // 2
        c = np.asarray(self.center)
        return c[:n] + 1j * c[n:]


FULL_SPACE = FullSpace()


@dataclass(frozen=True)
class NormResult:
    value: float
    rel_err: float
    radial_nodes: int
    angular_nodes: int
    radius: float

    def __float__(self):
        return self.value


@dataclass(frozen=True, eq=False)
class Evaluator:
    """Numeric function on C^n with hints for the quadrature engine.

    ``func`` maps an (N, n) complex array to (N,) complex values.
    ``log_envelope(r)`` bounds log|u| at distance r from ``center``; it only
    has to be tight enough to place the tail cutoff.  ``radial`` is a profile
    ``r -> u`` usable when |u| depends only on the distance to ``center``.
    ``feature_length`` is the smallest radial scale; shells are kept below
    twice this width.
    """

    n: int
    func: Callable[[np.ndarray], np.ndarray]
    center: tuple = ()
    log_envelope: Callable | None = None
    scan_radius: float = 30.0
    radial: Callable | None = None
    gaussian: GaussianFn | None = None
    angular_degree: int = 0
    feature_length: float = math.inf
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.center:
            object.__setattr__(self, "center", (0j,) * self.n)
        object.__setattr__(self, "center", tuple(complex(c) for c in self.center))

    def __call__(self, Z) -> np.ndarray:
        Z = np.asarray(Z, dtype=complex)
        single = Z.ndim == 1
        out = self.func(np.atleast_2d(Z))
        return out[0] if single else out

    @property
    def center_array(self) -> np.ndarray:
        return np.asarray(self.center, dtype=complex)


def _gaussian_envelope(g: GaussianFn):
    A, B, c = g.poly.arrays()
    degs = (A.sum(axis=1) + B.sum(axis=1)).astype(float)
    logc = np.log(np.abs(c)) if len(c) else np.zeros(0)
    t = float(g.t)

    def env(r):
        r = np.asarray(r, dtype=float)
        if len(c) == 0:
            return np.full(r.shape, -np.inf)
        lr = np.log(np.maximum(r, 1e-300))
        terms = logc[:, None] + degs[:, None] * lr[None, :]
        m = terms.max(axis=0)
        return m + np.log(np.exp(terms - m).sum(axis=0)) - t * r * r / 2

    return env


def as_evaluator(u) -> Evaluator:
    if isinstance(u, Evaluator):
        return u
    if not isinstance(u, GaussianFn):
        raise TypeError(f"cannot integrate object of type {type(u).__name__}")
    g = u
    A, B, c = g.poly.arrays()
    t = float(g.t)
    deg = g.degree()

    def func(Z):
        if len(c) == 0:
            return np.zeros(Z.shape[0], dtype=complex)
        out = np.empty(Z.shape[0], dtype=complex)
        for s in range(0, Z.shape[0], _CHUNK):
            blk = Z[s : s + _CHUNK]
            r2 = np.sum(np.abs(blk) ** 2, axis=1)
            out[s : s + _CHUNK] = _monomial_sum(blk, A, B, c) * np.exp(-t * r2 / 2)
        return out

    radial = None
    q = g.radial_coefficients()
    if q is not None and len(q):
        qc = np.array([complex(x) for x in q])

        def radial(r):
            r = np.asarray(r, dtype=float)
            s = r * r
            acc = np.zeros(r.shape, dtype=complex)
            for coef in qc[::-1]:
                acc = acc * s + coef
            return acc * np.exp(-t * s / 2)

    scan = 2 * math.sqrt(max(deg, 1) / t) + math.sqrt(200 / t) + 1
    return Evaluator(
        n=g.n,
        func=func,
        log_envelope=_gaussian_envelope(g),
        scan_radius=scan,
        radial=radial,
        gaussian=g,
        angular_degree=deg,
    )


def radial_eigen_evaluator(n: int, k: int) -> Evaluator:
    """``f_k / f_k(0)`` as a stable numeric evaluator (valid for large k)."""

    def func(Z):
        return radial_profile(n, k, np.sqrt(np.sum(np.abs(Z) ** 2, axis=1))).astype(complex)

    def profile(r):
        return radial_profile(n, k, r)

    def env(r):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(radial_profile(n, k, r)))

    return Evaluator(
        n=n,
        func=func,
        log_envelope=env,
        scan_radius=math.sqrt(4 * k + 2 * n + 2) + 12.0,
        radial=profile,
        angular_degree=0,
        feature_length=1 / math.sqrt(n + 2 * k),
        label=f"f_{k}",
    )


# ---------------------------------------------------------------------------
# rules


@lru_cache(maxsize=64)
def _leggauss(m: int):
    return np.polynomial.legendre.leggauss(m)


def _gl_composite(a: float, b: float, nodes: int, panel: int):
    """Composite Gauss-Legendre rule on [a, b]: nodes // panel shells of ``panel`` nodes."""
    if nodes < panel:
        x, w = _leggauss(nodes)
        half = (b - a) / 2
        return a + half * (x + 1), half * w
    shells = nodes // panel
    x, w = _leggauss(panel)
    edges = np.linspace(a, b, shells + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = (hi - lo) / 2
    return (lo + half * (x[None, :] + 1)).ravel(), (half * w[None, :]).ravel()


def _polar_rule(center: complex, R: float, nr: int, nt: int, panel: int):
    r, wr = _gl_composite(0.0, R, nr, panel)
    th = 2 * np.pi * np.arange(nt) / nt
    pts = center + (r[:, None] * np.exp(1j * th)[None, :]).ravel()
    w = (wr * r)[:, None] * np.full(nt, 2 * np.pi / nt)[None, :]
    return pts, w.ravel()


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere S^{d-1} in R^d."""
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


def _tail_radius(ev: Evaluator, p: float, d: int, spec: QuadSpec) -> float:
    """Radius beyond which |u|^p r^{d-1} is ``_TAIL_NATS`` below its peak."""
    if ev.log_envelope is None:
        return ev.scan_radius
    r = np.linspace(ev.scan_radius / 8000, ev.scan_radius, 8000)
    with np.errstate(divide="ignore", invalid="ignore"):
        L = p * ev.log_envelope(r) + (d - 1) * np.log(r)
    L = np.where(np.isfinite(L), L, -np.inf)
    if not np.isfinite(L).any():
        return ev.scan_radius
    i_peak = int(np.argmax(L))
    keep = np.nonzero(L >= L[i_peak] - _TAIL_NATS)[0]
    r_cut = r[min(keep[-1] + 1, len(r) - 1)]
    r_peak = r[i_peak]
    return float(r_peak + spec.tail_radius_multiplier / 3.0 * (r_cut - r_peak))


# ---------------------------------------------------------------------------
# integration paths; each returns a plain float sum for one resolution level


def _level_counts(
    spec: QuadSpec, level: int, ev: Evaluator | None, p: float, R: float = 0.0, angular_exact: bool = False
):
    nr0 = spec.radial_nodes
    if ev is not None and math.isfinite(ev.feature_length):
        nr0 = max(nr0, spec.panel_order * math.ceil(R / (2 * ev.feature_length)))
    nr = nr0 * 2**level
    nt0 = spec.angular_nodes
    if ev is not None and ev.angular_degree:
        # trapezoid is exact for trig degree < nt; |u|^p has degree about p * deg
        nt0 = max(nt0, int(math.ceil(p * ev.angular_degree)) + 2)
    if ev is not None and math.isfinite(ev.feature_length):
        # off-centre circles of radius R cross oscillations of size feature_length
        nt0 = max(nt0, int(math.ceil(2 * math.pi * R / ev.feature_length)))
    # the angular floor already integrates even powers of centred polynomials exactly
    return nr, nt0 if angular_exact else nt0 * 2**level


def _centred_gaussian(ev: Evaluator, dom, center) -> bool:
    """Polynomial-Gaussian integrated over R^{2n} on polar grids centred at 0."""
    return ev.gaussian is not None and isinstance(dom, FullSpace) and not np.any(center)


def _radial_sum(h: Callable, d: int, R: float, nr: int, panel: int) -> float:
    r, w = _gl_composite(0.0, R, nr, panel)
    return float(sphere_area(d) * np.sum(w * h(r) * r ** (d - 1)))


def _separable_sum(g: GaussianFn, p: float, R: float, nr: int, panel: int) -> float:
    ((a, b), c), = g.poly.terms.items()
    t = float(g.t)
    r, w = _gl_composite(0.0, R, nr, panel)
    total = abs(complex(c)) ** p
    for aj, bj in zip(a, b):
        e = (aj + bj) * p
        total *= 2 * np.pi * float(np.sum(w * r ** (e + 1) * np.exp(-p * t * r * r / 2)))
    return total


def _grid_points(ev_n: int, dom, center: np.ndarray, R: float, nr: int, nt: int, panel: int):
    """Explicit (points, weights) for n = 1, or a ball in n = 2."""
    if ev_n == 1:
        return _polar_rule(complex(center[0]), R, nr, nt, panel)
    if ev_n == 2:
        r, wr = _gl_composite(0.0, R, nr, panel)
        neta = max(4, nt // 2)
        eta, weta = _gl_composite(0.0, np.pi / 2, neta, panel)
        th = 2 * np.pi * np.arange(nt) / nt
        wth = np.full(nt, 2 * np.pi / nt)
        Rr, Ee, T1, T2 = np.meshgrid(r, eta, th, th, indexing="ij")
        W = (
            (wr * r**3)[:, None, None, None]
            * (weta * np.cos(eta) * np.sin(eta))[None, :, None, None]
            * wth[None, None, :, None]
            * wth[None, None, None, :]
        )
        z1 = center[0] + Rr * np.cos(Ee) * np.exp(1j * T1)
        z2 = center[1] + Rr * np.sin(Ee) * np.exp(1j * T2)
        return np.stack([z1.ravel(), z2.ravel()], axis=1), W.ravel()
    raise ValueError(f"ball / non-radial quadrature supports n <= 2, got n={ev_n}")


def _explicit_sum(values_fn: Callable, pts: np.ndarray, w: np.ndarray) -> complex:
    if pts.ndim == 1:
        pts = pts[:, None]
    total = 0j
    for s in range(0, len(w), _CHUNK):
        total += np.sum(w[s : s + _CHUNK] * values_fn(pts[s : s + _CHUNK]))
    return total


def _tensor_sum(ev: Evaluator, reducer: Callable, centers, R, nr, nt, panel) -> complex:
    """Sum over the product of per-coordinate polar rules (n = 2, full space)."""
    rules = [_polar_rule(complex(c), R, nr, nt, panel) for c in centers]
    (z1, w1), (z2, w2) = rules
    g = ev.gaussian
    total = 0j
    if g is not None and all(c == 0 for c in centers):
        A, B, c = g.poly.arrays()
        t = float(g.t)
        T1 = (z1[None, :] ** A[:, :1]) * (np.conj(z1)[None, :] ** B[:, :1])
        T1 *= np.exp(-t * np.abs(z1) ** 2 / 2)[None, :] * c[:, None]
        T2 = (z2[None, :] ** A[:, 1:2]) * (np.conj(z2)[None, :] ** B[:, 1:2])
        T2 *= np.exp(-t * np.abs(z2) ** 2 / 2)[None, :]
        blk = max(1, _CHUNK // len(z2))
        for s in range(0, len(z1), blk):
            vals = T1[:, s : s + blk].T @ T2
            total += np.sum(w1[s : s + blk, None] * reducer(vals) * w2[None, :])
        return total
    blk = max(1, _CHUNK // len(z2))
    for s in range(0, len(z1), blk):
        a = z1[s : s + blk]
        Z = np.stack([np.repeat(a, len(z2)), np.tile(z2, len(a))], axis=1)
        vals = reducer(ev.func(Z)).reshape(len(a), len(z2))
        total += np.sum(w1[s : s + blk, None] * vals * w2[None, :])
    return total


def _converge(level_fn: Callable[[int], float], spec: QuadSpec, what: str):
    prev = level_fn(0)
    diff = math.inf
    for level in range(1, spec.max_doublings + 1):
        cur = level_fn(level)
        scale = abs(cur)
        if scale == 0:
            if prev == 0:
                return cur, 0.0, level
            diff = math.inf
        else:
            diff = abs(cur - prev) / scale
        if diff <= spec.target_rel_err:
            return cur, max(diff, _ERR_FLOOR), level
        prev = cur
    raise QuadratureError(
        f"{what}: doubling test failed after {spec.max_doublings} doublings "
        f"(last relative change {diff:.3e} > {spec.target_rel_err:.1e})"
    )


# ---------------------------------------------------------------------------
# public operations


def lp_norm_numeric(u, p: float, dom=FULL_SPACE, spec: QuadSpec | None = None, n: int | None = None) -> NormResult:
    """``||u||_{L^p(dom)}`` with a relative error estimate from the doubling test."""
    spec = spec or QuadSpec()
    ev = as_evaluator(u)
    if n is not None and n != ev.n:
        raise ValueError(f"dimension mismatch: n={n} but function lives on C^{ev.n}")
    if not p >= 1 or math.isinf(p):
        raise ValueError(f"need finite p >= 1, got {p}")
    n, d = ev.n, 2 * ev.n
    panel = spec.panel_order
    if isinstance(dom, Ball):
        center = dom.complex_center()
        if len(center) != n:
            raise ValueError("ball centre dimension does not match the function")
        R = dom.radius
    else:
        center = ev.center_array
        R = _tail_radius(ev, p, d, spec)

    def absp(vals):
        if even_p:
            return (vals.real**2 + vals.imag**2) ** (int(p) // 2)
        return np.abs(vals) ** p

    even_p = float(p).is_integer() and int(p) % 2 == 0
    ang_exact = even_p and _centred_gaussian(ev, dom, center)
    radial_ok = ev.radial is not None and np.allclose(center, ev.center_array, atol=0, rtol=0)
    g = ev.gaussian
    if radial_ok:
        prof = ev.radial

        def level_fn(level):
            nr, _ = _level_counts(spec, level, ev, p, R)
            return _radial_sum(lambda r: np.abs(prof(r)) ** p, d, R, nr, panel)

    elif isinstance(dom, FullSpace) and g is not None and len(g.poly) == 1 and not center.any():

        def level_fn(level):
            nr, _ = _level_counts(spec, level, ev, p, R)
            return _separable_sum(g, p, R, nr, panel)

    elif n == 1 or isinstance(dom, Ball):

        def level_fn(level):
            nr, nt = _level_counts(spec, level, ev, p, R, ang_exact)
            pts, w = _grid_points(n, dom, center, R, nr, nt, panel)
            return _explicit_sum(lambda Z: absp(ev.func(Z)), pts, w).real

    elif n == 2:

        def level_fn(level):
            nr, nt = _level_counts(spec, level, ev, p, R, ang_exact)
            return _tensor_sum(ev, absp, center, R, nr, nt, panel).real

    else:
        raise ValueError(
            f"non-radial full-space quadrature supports n <= 2 (or single-term functions), got n={n}"
        )

    integral, err, level = _converge(level_fn, spec, f"L^{p} norm")
    nr, nt = _level_counts(spec, level, ev, p, R, ang_exact)
    value = integral ** (1 / p) if integral > 0 else 0.0
    return NormResult(value=value, rel_err=err / p, radial_nodes=nr, angular_nodes=nt, radius=R)


def integrate_radial(
    h: Callable, n: int, R: float, spec: QuadSpec | None = None, feature_length: float = math.inf
) -> tuple[float, float]:
    """``int_{B_R(0)} h(|w|) dw`` for a radial integrand given by its profile."""
    spec = spec or QuadSpec()
    if not R > 0:
        raise ValueError(f"radius must be positive, got {R}")
    d = 2 * n

    def level_fn(level):
        hint = Evaluator(n=n, func=h, feature_length=feature_length)
        nr, _ = _level_counts(spec, level, hint, 1, R)
        return _radial_sum(h, d, R, nr, spec.panel_order)

    val, err, _ = _converge(level_fn, spec, "radial integral")
    return val, err


def inner_numeric(u, v, dom=FULL_SPACE, spec: QuadSpec | None = None) -> tuple[complex, float]:
    """``int_dom u * conj(v)`` by quadrature; returns (value, absolute error estimate)."""
    spec = spec or QuadSpec()
    eu, ev = as_evaluator(u), as_evaluator(v)
    if eu.n != ev.n:
        raise ValueError(f"dimension mismatch: {eu.n} vs {ev.n}")
    n = eu.n
    if isinstance(dom, Ball):
        center, R = dom.complex_center(), dom.radius
    else:
        center = np.zeros(n, dtype=complex)
        R = max(
            float(np.linalg.norm(e.center_array)) + _tail_radius(e, 2.0, 2 * n, spec) for e in (eu, ev)
        )
    deg = max(eu.angular_degree, ev.angular_degree)
    if any(abs(c) for c in eu.center + ev.center):
        # off-centre Gaussians carry angular frequencies of order |w| * R
        shift = max(abs(c) for c in eu.center + ev.center)
        deg = max(deg, int(math.ceil(shift * R)))
    hint = Evaluator(
        n=n, func=eu.func, angular_degree=deg, feature_length=min(eu.feature_length, ev.feature_length)
    )

    def values(Z):
        return eu.func(Z) * np.conj(ev.func(Z))

    def level_fn(level):
        nr, nt = _level_counts(spec, level, hint, 2, R)
        if n == 1 or isinstance(dom, Ball):
            pts, w = _grid_points(n, dom, center, R, nr, nt, spec.panel_order)
            return _explicit_sum(values, pts, w)
        if n == 2:
            prod = Evaluator(n=2, func=values)
            return _tensor_sum(prod, lambda x: x, center, R, nr, nt, spec.panel_order)
        raise ValueError(f"inner_numeric supports n <= 2, got {n}")

    # converge on the absolute change, scaled by the product of the L^2 norms
    scale = lp_norm_numeric(eu, 2, dom, spec).value * lp_norm_numeric(ev, 2, dom, spec).value
    prev = level_fn(0)
    diff = math.inf
    for level in range(1, spec.max_doublings + 1):
        cur = level_fn(level)
        diff = abs(cur - prev)
        if diff <= spec.target_rel_err * max(scale, 1e-300):
            return complex(cur), max(diff, _ERR_FLOOR * scale)
        prev = cur
    raise QuadratureError(f"inner product: doubling test failed (last change {diff:.3e})")


def radial_profile_derivative(u, n: int, r: float, h: float = 1e-5) -> float:
    """Central finite difference of the radial profile at radius ``r >= 0``."""
    if r < 0:
        raise ValueError(f"radius must be >= 0, got {r}")
    ev = as_evaluator(u)
    if ev.radial is None:
        raise ValueError("radial_profile_derivative needs a radial function")
    if ev.n != n:
        raise ValueError(f"dimension mismatch: n={n} but function lives on C^{ev.n}")
    # profiles are even in r, so the stencil is valid at r = 0 as well
    vals = ev.radial(np.array([r - h, r + h]))
    return float(np.real(vals[1] - vals[0]) / (2 * h))


def half_height_radius(n: int, k: int) -> float:
    """First radius where ``f_k(r) = f_k(0) / 2``."""
    # ratio behaves like 1 - (n + 2k) r^2 / (2n) near 0; bracket beyond that
    hi = 2.0 * math.sqrt(n / (n + 2 * k))
    r = np.linspace(0.0, hi, 4001)
    prof = radial_profile(n, k, r)
    i = int(np.argmax(prof < 0.5))
    if i == 0:
        raise RuntimeError(f"no half-height crossing found below r={hi} for n={n}, k={k}")
    lo, hi = r[i - 1], r[i]
    for _ in range(60):
        mid = (lo + hi) / 2
        if radial_profile(n, k, mid) >= 0.5:
            lo = mid
        else:
            hi = mid
    return lo


def fit_half_height_constant(ns=(1, 2), k_max: int = 64) -> float:
    """Largest c with ``f_k >= f_k(0)/2`` on ``|z| <= c / sqrt(n + 2k)`` for all n in ns, k <= k_max."""
    return min(
        half_height_radius(n, k) * math.sqrt(n + 2 * k) for n in ns for k in range(k_max + 1)
    )
