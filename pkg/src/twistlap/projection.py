"""Exact spectral projections on the polynomial-Gaussian class, and twisted translations."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .eigenbasis import EigenLabel, build_eigenfunction, exact_l2_norm_sq
from .hermite_core import CQ, CPoly, GaussianFn
from .moments import ExactValue, inner_exact
from .quadrature import Evaluator, as_evaluator

__all__ = [
    "EigenExpansion",
    "TwistedTranslation",
    "expand",
    "project",
    "kernel_diag_origin",
    "twisted_translate",
]


@dataclass(frozen=True)
class EigenExpansion:
    n: int
    entries: tuple  # of (EigenLabel, CQ), sorted by label

    def reconstruct(self) -> GaussianFn:
        out = GaussianFn(CPoly.zero(self.n))
        for label, c in self.entries:
            out = out + build_eigenfunction(label).fn * c
        return out

    def levels(self) -> list[int]:
        return sorted({label.k for label, _ in self.entries})

    def l2_norm_sq(self) -> ExactValue:
        total = ExactValue.zero()
        for label, c in self.entries:
            total = total + exact_l2_norm_sq(label) * c.abs2()
        return total

    def to_list(self) -> list[dict]:
        return [
            {"label": label.to_dict(), "re": str(c.re), "im": str(c.im)}
            for label, c in self.entries
        ]

    @classmethod
    def from_list(cls, n: int, rows: list[dict]) -> "EigenExpansion":
        entries = []
        for row in rows:
            label = EigenLabel.from_dict(row["label"])
            if label.n != n:
                raise ValueError(f"label {label} does not live in dimension {n}")
            entries.append((label, CQ(Fraction(row["re"]), Fraction(row.get("im", "0")))))
        return cls(n, tuple(sorted(entries, key=lambda e: e[0])))


def _candidate_labels(g: GaussianFn) -> set[EigenLabel]:
    # f_{alpha,beta} has monomials zbar^(alpha-j) z^(beta-j); z^a zbar^b needs labels (b-j, a-j)
    labels = set()
    for a, b in g.poly:
        ranges = [range(min(x, y) + 1) for x, y in zip(a, b)]
        for j in itertools.product(*ranges):
            labels.add(
                EigenLabel(tuple(y - i for y, i in zip(b, j)), tuple(x - i for x, i in zip(a, j)))
            )
    return labels


def expand(g: GaussianFn) -> EigenExpansion:
    """Exact coefficients ``c_L = <g, f_L> / ||f_L||^2`` over the special Hermite basis."""
    if g.t != 1:
        raise ValueError(f"expansion is only defined on the width-1 class (got t={g.t})")
    entries = []
    for label in sorted(_candidate_labels(g)):
        ip = inner_exact(g, build_eigenfunction(label).fn)
        if ip.is_zero():
            continue
        c = ip / exact_l2_norm_sq(label)
        if c.pi_power != 0:
            raise ArithmeticError(f"non-rational expansion coefficient for {label}: {c}")
        entries.append((label, c.coeff))
    return EigenExpansion(g.n, tuple(entries))


def project(g: GaussianFn, k: int) -> GaussianFn:
    """Spectral projection onto the eigenspace with eigenvalue ``n + 2k``."""
    exp = expand(g)
    kept = tuple(e for e in exp.entries if e[0].k == k)
    return EigenExpansion(g.n, kept).reconstruct()


def kernel_diag_origin(n: int, k: int) -> ExactValue:
    """``K(0,0) = sum |f_L(0)|^2 / ||f_L||^2`` over the level-k eigenbasis: ``pi^-n binom(n+k-1, k)``.

    Only ``beta == alpha`` contributes since ``f_{alpha,beta}(0) = alpha! delta``.
    """
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    return ExactValue(Fraction(math.comb(n + k - 1, k)), -n)


@dataclass(frozen=True)
class TwistedTranslation:
    a: tuple
    b: tuple

    def __post_init__(self):
        a = tuple(float(x) for x in np.atleast_1d(self.a))
        b = tuple(float(x) for x in np.atleast_1d(self.b))
        if len(a) != len(b):
            raise ValueError("a and b must have the same length")
        if not all(math.isfinite(x) for x in a + b):
            raise ValueError("translation must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def w(self) -> np.ndarray:
        return np.asarray(self.a) + 1j * np.asarray(self.b)

    @classmethod
    def from_complex(cls, w) -> "TwistedTranslation":
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        return cls(tuple(w.real), tuple(w.imag))


def twisted_translate(g, tt: TwistedTranslation) -> Evaluator:
    """``z -> exp(i (a.y - b.x)) g(x - a, y - b)`` as a numeric evaluator."""
    ev = as_evaluator(g)
    if tt.n != ev.n:
        raise ValueError(f"translation lives in C^{tt.n}, function in C^{ev.n}")
    a, b, w = np.asarray(tt.a), np.asarray(tt.b), tt.w

    def func(Z):
        phase = np.exp(1j * (Z.imag @ a - Z.real @ b))
        return phase * ev.func(Z - w[None, :])

    radial = None
    if ev.radial is not None:
        prof = ev.radial

        def radial(r):
            return np.abs(prof(r))

    return Evaluator(
        n=ev.n,
        func=func,
        center=tuple(ev.center_array + w),
        log_envelope=ev.log_envelope,
        scan_radius=ev.scan_radius,
        radial=radial,
        angular_degree=ev.angular_degree,
        label=f"T_w {ev.label}".strip(),
    )
