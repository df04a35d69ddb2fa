"""Special Hermite eigenfunctions f_{alpha,beta} and radial eigenfunctions f_k."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .hermite_core import (
    CPoly,
    GaussianFn,
    apply_L,
    ladder_raise,
    mi_abs,
    mi_factorial,
    multi_indices,
    multinomial,
)
from .moments import ExactValue

__all__ = [
    "EigenLabel",
    "Eigenfunction",
    "SpectrumPoint",
    "build_eigenfunction",
    "exact_l2_norm_sq",
    "build_radial",
    "radial_closed_forms",
    "enumerate_labels",
    "radial_profile",
]


@dataclass(frozen=True, order=True)
class EigenLabel:
    alpha: tuple[int, ...]
    beta: tuple[int, ...]

    def __post_init__(self):
        alpha, beta = tuple(int(a) for a in self.alpha), tuple(int(b) for b in self.beta)
        if len(alpha) != len(beta) or not alpha:
            raise ValueError(f"alpha and beta must have equal positive length: {alpha}, {beta}")
        if min(alpha + beta) < 0:
            raise ValueError(f"multi-index entries must be >= 0: {alpha}, {beta}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @property
    def n(self) -> int:
        return len(self.alpha)

    @property
    def k(self) -> int:
        return mi_abs(self.alpha)

    def eigenvalue(self) -> int:
        return self.n + 2 * self.k

    def to_dict(self) -> dict:
        return {"alpha": list(self.alpha), "beta": list(self.beta), "n": self.n}

    @classmethod
    def from_dict(cls, data: dict) -> "EigenLabel":
        label = cls(tuple(data["alpha"]), tuple(data["beta"]))
        if "n" in data and int(data["n"]) != label.n:
            raise ValueError(f"label n={data['n']} does not match index length {label.n}")
        return label


@dataclass(frozen=True)
class Eigenfunction:
    label: EigenLabel
    fn: GaussianFn
    eigenvalue: int


@dataclass(frozen=True)
class SpectrumPoint:
    n: int
    k: int

    @property
    def mu(self) -> int:
        return self.n + 2 * self.k

    @property
    def lam(self) -> float:
        return math.sqrt(self.mu)


@lru_cache(maxsize=4096)
def _ladder_power(alpha: tuple[int, ...], beta: tuple[int, ...]) -> GaussianFn:
    if not any(alpha):
        return GaussianFn(CPoly.monomial(beta, (0,) * len(beta)))
    j = next(i for i, a in enumerate(alpha) if a)
    prev = alpha[:j] + (alpha[j] - 1,) + alpha[j + 1:]
    return ladder_raise(_ladder_power(prev, beta), j + 1)


def build_eigenfunction(label: EigenLabel, check: bool = False) -> Eigenfunction:
    """``f_{alpha,beta} = (-1/2 D^*)^alpha (z^beta e^{-|z|^2/2})``.

    The leading monomial is ``(-1)^|alpha| zbar^alpha z^beta`` and
    ``f_{alpha,alpha}(0) = alpha!``.  With ``check=True`` the eigen-equation
    is verified exactly.
    """
    fn = _ladder_power(label.alpha, label.beta)
    ef = Eigenfunction(label, fn, label.eigenvalue())
    if check and apply_L(fn) != fn * ef.eigenvalue:
        raise ArithmeticError(f"eigen-equation fails for {label}")
    return ef


def exact_l2_norm_sq(label: EigenLabel) -> ExactValue:
    """``pi^n alpha! beta!``."""
    return ExactValue(Fraction(mi_factorial(label.alpha) * mi_factorial(label.beta)), label.n)


def build_radial(n: int, k: int) -> GaussianFn:
    """``f_k = 4^-k sum_{|alpha|=k} binom(k, alpha) f_{alpha,alpha}``."""
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    out = GaussianFn(CPoly.zero(n))
    for alpha in multi_indices(n, k):
        f = build_eigenfunction(EigenLabel(alpha, alpha)).fn
        out = out + f * multinomial(alpha)
    return out * Fraction(1, 4**k)


def radial_closed_forms(n: int, k: int) -> tuple[ExactValue, ExactValue]:
    """``(f_k(0), ||f_k||_2^2)`` in closed form."""
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    dim = math.comb(n + k - 1, k)
    kf = math.factorial(k)
    at_zero = ExactValue(Fraction(kf * dim, 4**k))
    norm_sq = ExactValue(Fraction(kf * kf * dim, 16**k), n)
    return at_zero, norm_sq


def enumerate_labels(n: int, k: int, B: int) -> list[EigenLabel]:
    """Labels with ``|alpha| = k`` and ``|beta| <= B``: a truncation of the eigenspace."""
    if k < 0 or B < 0:
        raise ValueError(f"need k >= 0 and B >= 0, got k={k}, B={B}")
    alphas = multi_indices(n, k)
    return [
        EigenLabel(alpha, beta)
        for alpha in alphas
        for m in range(B + 1)
        for beta in multi_indices(n, m)
    ]


def radial_profile(n: int, k: int, r) -> np.ndarray:
    """``f_k(r) / f_k(0)`` as a float array.

    Uses ``f_k(z) = 4^-k k! L_k^{(n-1)}(|z|^2) e^{-|z|^2/2}`` evaluated through the
    three-term Laguerre recurrence with the Gaussian folded into the seed, which
    stays finite for large k where the monomial expansion cancels catastrophically.
    """
    r = np.asarray(r, dtype=float)
    x = r * r
    a = n - 1
    prev = np.exp(-x / 2)
    if k == 0:
        return prev
    cur = (1 + a - x) * prev
    for m in range(1, k):
        prev, cur = cur, ((2 * m + 1 + a - x) * cur - (m + a) * prev) / (m + 1)
    return cur / math.comb(k + a, k)
