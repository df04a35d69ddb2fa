"""Exact polynomial-Gaussian algebra on C^n.

A :class:`GaussianFn` is ``p(z, zbar) * exp(-t |z|^2 / 2)`` where ``p`` is a
:class:`CPoly` with exact complex-rational coefficients.  On the width-1 class
the ladder operators and the twisted Laplacian act on ``p`` alone:

* lowering  ``D_j``        : ``p -> 2 d/dzbar_j p``
* raising   ``-1/2 D_j^*`` : ``p -> d/dz_j p - zbar_j p``
* ``L = 1/2 sum D_j^* D_j + n``
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "CQ",
    "CPoly",
    "GaussianFn",
    "mi_abs",
    "mi_factorial",
    "multinomial",
    "multi_indices",
    "ladder_raise",
    "ladder_lower",
    "apply_L",
    "evaluate",
]


# ---------------------------------------------------------------------------
# multi-indices


def mi_abs(alpha: Iterable[int]) -> int:
    return sum(alpha)


def mi_factorial(alpha: Iterable[int]) -> int:
    out = 1
    for a in alpha:
        out *= math.factorial(a)
    return out


def multinomial(alpha: Iterable[int]) -> int:
    """``|alpha|! / alpha!`` in exact integers."""
    alpha = tuple(alpha)
    return math.factorial(sum(alpha)) // mi_factorial(alpha)


def multi_indices(n: int, k: int) -> list[tuple[int, ...]]:
    """All alpha in N^n with |alpha| = k, first coordinate descending."""
    if n < 1 or k < 0:
        raise ValueError(f"need n >= 1 and k >= 0, got n={n}, k={k}")
    if n == 1:
        return [(k,)]
    out = []
    for first in range(k, -1, -1):
        for rest in multi_indices(n - 1, k - first):
            out.append((first,) + rest)
    return out


# ---------------------------------------------------------------------------
# exact complex rationals


class CQ:
    """Complex number with :class:`~fractions.Fraction` parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    @classmethod
    def coerce(cls, x) -> "CQ":
        if isinstance(x, CQ):
            return x
        if isinstance(x, complex):
            return cls(Fraction(x.real), Fraction(x.imag))
        return cls(x)

    def __add__(self, other):
        o = CQ.coerce(other)
        return CQ(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = CQ.coerce(other)
        return CQ(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return CQ.coerce(other) - self

    def __neg__(self):
        return CQ(-self.re, -self.im)

    def __mul__(self, other):
        o = CQ.coerce(other)
        return CQ(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = CQ.coerce(other)
        den = o.re * o.re + o.im * o.im
        if den == 0:
            raise ZeroDivisionError("CQ division by zero")
        num = self * o.conj()
        return CQ(num.re / den, num.im / den)

    def conj(self) -> "CQ":
        return CQ(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        try:
            o = CQ.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if not self.im:
            return f"CQ({self.re})"
        return f"CQ({self.re}, {self.im})"


_ZERO = CQ(0)


# ---------------------------------------------------------------------------
# polynomials in z, zbar


def _key_order(key):
    a, b = key
    return (sum(a) + sum(b), a + b)


def _add_exp(x: tuple[int, ...], y: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(i + j for i, j in zip(x, y))


class CPoly:
    """Polynomial in ``z_1..z_n, zbar_1..zbar_n`` with exact coefficients.

    Terms map ``(a, b)`` to a :class:`CQ`, representing ``c * z^a * zbar^b``.
    Zero coefficients are never stored.  Instances are treated as immutable.
    """

    __slots__ = ("n", "_terms", "_hash")

    def __init__(self, n: int, terms: Mapping | None = None):
        if n < 1:
            raise ValueError(f"dimension must be >= 1, got {n}")
        self.n = n
        clean = {}
        for (a, b), c in (terms or {}).items():
            a, b = tuple(int(x) for x in a), tuple(int(x) for x in b)
            if len(a) != n or len(b) != n:
                raise ValueError(f"exponent length mismatch for n={n}: {a}, {b}")
            if min(a + b, default=0) < 0:
                raise ValueError(f"negative exponent in {a}, {b}")
            c = CQ.coerce(c)
            if c:
                clean[(a, b)] = clean.get((a, b), _ZERO) + c
                if not clean[(a, b)]:
                    del clean[(a, b)]
        self._terms = clean
        self._hash = None

    # construction helpers
    @classmethod
    def zero(cls, n: int) -> "CPoly":
        return cls(n)

    @classmethod
    def const(cls, n: int, c=1) -> "CPoly":
        return cls(n, {((0,) * n, (0,) * n): c})

    @classmethod
    def monomial(cls, a, b, c=1) -> "CPoly":
        a, b = tuple(a), tuple(b)
        return cls(len(a), {(a, b): c})

    @classmethod
    def _raw(cls, n: int, terms: dict) -> "CPoly":
        obj = cls.__new__(cls)
        obj.n = n
        obj._terms = terms
        obj._hash = None
        return obj

    # container protocol
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        """Terms in graded-lexicographic order of the concatenated exponents."""
        return sorted(self._terms.items(), key=lambda kv: _key_order(kv[0]))

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def coeff(self, a, b) -> CQ:
        return self._terms.get((tuple(a), tuple(b)), _ZERO)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        return max((sum(a) + sum(b) for a, b in self._terms), default=0)

    # arithmetic
    def _check(self, other: "CPoly"):
        if self.n != other.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")

    def __add__(self, other):
        if not isinstance(other, CPoly):
            other = CPoly.const(self.n, other)
        self._check(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            s = out.get(k)
            s = c if s is None else s + c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return CPoly._raw(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return CPoly._raw(self.n, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, CPoly):
            other = CPoly.const(self.n, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "CPoly":
        c = CQ.coerce(c)
        if not c:
            return CPoly.zero(self.n)
        return CPoly._raw(self.n, {k: v * c for k, v in self._terms.items()})

    def __mul__(self, other):
        if not isinstance(other, CPoly):
            return self.scale(other)
        self._check(other)
        out: dict = {}
        for (a1, b1), c1 in self._terms.items():
            for (a2, b2), c2 in other._terms.items():
                k = (_add_exp(a1, a2), _add_exp(b1, b2))
                s = out.get(k)
                out[k] = c1 * c2 if s is None else s + c1 * c2
        return CPoly._raw(self.n, {k: c for k, c in out.items() if c})

    def __rmul__(self, other):
        return self.scale(other)

    def conj(self) -> "CPoly":
        """Pointwise complex conjugate: swaps z and zbar exponents."""
        return CPoly._raw(self.n, {(b, a): c.conj() for (a, b), c in self._terms.items()})

    def d_z(self, j: int) -> "CPoly":
        out = {}
        for (a, b), c in self._terms.items():
            if a[j]:
                a2 = a[:j] + (a[j] - 1,) + a[j + 1:]
                out[(a2, b)] = c * a[j]
        return CPoly._raw(self.n, out)

    def d_zbar(self, j: int) -> "CPoly":
        out = {}
        for (a, b), c in self._terms.items():
            if b[j]:
                b2 = b[:j] + (b[j] - 1,) + b[j + 1:]
                out[(a, b2)] = c * b[j]
        return CPoly._raw(self.n, out)

    def mul_z(self, j: int) -> "CPoly":
        return CPoly._raw(
            self.n,
            {(a[:j] + (a[j] + 1,) + a[j + 1:], b): c for (a, b), c in self._terms.items()},
        )

    def mul_zbar(self, j: int) -> "CPoly":
        return CPoly._raw(
            self.n,
            {(a, b[:j] + (b[j] + 1,) + b[j + 1:]): c for (a, b), c in self._terms.items()},
        )

    def __eq__(self, other):
        if not isinstance(other, CPoly):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self):
        if not self._terms:
            return f"CPoly(n={self.n}, 0)"
        parts = []
        for (a, b), c in self.items():
            mono = "".join(f"z{j+1}^{e}" for j, e in enumerate(a) if e)
            mono += "".join(f"zb{j+1}^{e}" for j, e in enumerate(b) if e)
            parts.append(f"{c!r}{'*' + mono if mono else ''}")
        return f"CPoly(n={self.n}, " + " + ".join(parts) + ")"

    # numeric export
    def arrays(self):
        """``(A, B, coeffs)`` as int arrays of shape (T, n) and complex (T,)."""
        items = self.items()
        if not items:
            z = np.zeros((0, self.n), dtype=np.int64)
            return z, z.copy(), np.zeros(0, dtype=complex)
        A = np.array([a for (a, _), _ in items], dtype=np.int64)
        B = np.array([b for (_, b), _ in items], dtype=np.int64)
        c = np.array([complex(v) for _, v in items])
        return A, B, c


# ---------------------------------------------------------------------------
# polynomial times Gaussian


class GaussianFn:
    """``poly(z, zbar) * exp(-t |z|^2 / 2)`` on C^n, with rational width ``t > 0``."""

    __slots__ = ("poly", "t")

    def __init__(self, poly: CPoly, t=1):
        t = Fraction(t)
        if t <= 0:
            raise ValueError(f"width must be positive, got {t}")
        self.poly = poly
        self.t = t

    @property
    def n(self) -> int:
        return self.poly.n

    @classmethod
    def gaussian(cls, n: int, t=1) -> "GaussianFn":
        return cls(CPoly.const(n), t)

    @classmethod
    def monomial(cls, a, b, c=1, t=1) -> "GaussianFn":
        return cls(CPoly.monomial(a, b, c), t)

    def is_zero(self) -> bool:
        return self.poly.is_zero()

    def degree(self) -> int:
        return self.poly.degree()

    def _same(self, other: "GaussianFn"):
        if self.n != other.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")
        if self.t != other.t and not (self.is_zero() or other.is_zero()):
            raise ValueError(f"width mismatch: {self.t} vs {other.t}")

    def __add__(self, other: "GaussianFn") -> "GaussianFn":
        self._same(other)
        t = other.t if self.is_zero() else self.t
        return GaussianFn(self.poly + other.poly, t)

    def __sub__(self, other: "GaussianFn") -> "GaussianFn":
        return self + (-other)

    def __neg__(self) -> "GaussianFn":
        return GaussianFn(-self.poly, self.t)

    def __mul__(self, c) -> "GaussianFn":
        return GaussianFn(self.poly.scale(c), self.t)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, GaussianFn):
            return NotImplemented
        if self.is_zero() and other.is_zero():
            return self.n == other.n
        return self.t == other.t and self.poly == other.poly

    def __hash__(self):
        return hash((self.poly, self.t))

    def __repr__(self):
        return f"GaussianFn({self.poly!r}, t={self.t})"

    def conj(self) -> "GaussianFn":
        return GaussianFn(self.poly.conj(), self.t)

    # serialization
    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "t": str(self.t),
            "terms": [
                {"a": list(a), "b": list(b), "re": str(c.re), "im": str(c.im)}
                for (a, b), c in self.poly.items()
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GaussianFn":
        n = int(data["n"])
        terms = {}
        for term in data.get("terms", []):
            key = (tuple(term["a"]), tuple(term["b"]))
            c = CQ(Fraction(term.get("re", "0")), Fraction(term.get("im", "0")))
            terms[key] = terms.get(key, _ZERO) + c
        return cls(CPoly(n, terms), Fraction(data.get("t", "1")))

    def radial_coefficients(self) -> list[CQ] | None:
        """Coefficients ``q_m`` with ``poly = sum_m q_m |z|^(2m)``, or None if not radial."""
        if self.is_zero():
            return []
        by_deg: dict[int, CQ] = {}
        for (a, b), c in self.poly.items():
            if a != b:
                return None
            m = sum(a)
            q = c / multinomial(a)
            if m in by_deg:
                if by_deg[m] != q:
                    return None
            else:
                by_deg[m] = q
        top = max(by_deg)
        # every monomial of (sum z_j zbar_j)^m must be present
        for m, q in by_deg.items():
            if len(multi_indices(self.n, m)) != sum(
                1 for (a, _b) in self.poly if sum(a) == m
            ):
                return None
        return [by_deg.get(m, _ZERO) for m in range(top + 1)]


# ---------------------------------------------------------------------------
# operators


def _require_unit_width(g: GaussianFn, what: str):
    if g.t != 1:
        raise ValueError(f"{what} is only defined on the width-1 class (got t={g.t})")


def _check_coord(g: GaussianFn, j: int) -> int:
    if not 1 <= j <= g.n:
        raise ValueError(f"coordinate index must be in 1..{g.n}, got {j}")
    return j - 1


def ladder_raise(g: GaussianFn, j: int) -> GaussianFn:
    """Apply ``-1/2 D_j^*``: ``p -> d/dz_j p - zbar_j p`` (j is 1-based)."""
    _require_unit_width(g, "ladder_raise")
    i = _check_coord(g, j)
    return GaussianFn(g.poly.d_z(i) - g.poly.mul_zbar(i))


def ladder_lower(g: GaussianFn, j: int) -> GaussianFn:
    """Apply ``D_j``: ``p -> 2 d/dzbar_j p`` (j is 1-based)."""
    _require_unit_width(g, "ladder_lower")
    i = _check_coord(g, j)
    return GaussianFn(g.poly.d_zbar(i).scale(2))


def apply_L(g: GaussianFn) -> GaussianFn:
    """Twisted Laplacian: ``p -> n p + sum_j (2 zbar_j dzbar_j p - 2 dz_j dzbar_j p)``."""
    _require_unit_width(g, "apply_L")
    p = g.poly
    out = p.scale(g.n)
    for i in range(g.n):
        db = p.d_zbar(i)
        out = out + (db.mul_zbar(i) - db.d_z(i)).scale(2)
    return GaussianFn(out)


def evaluate(g: GaussianFn, z) -> complex | np.ndarray:
    """Evaluate at a point of C^n, or at an (N, n) array of points."""
    z = np.asarray(z, dtype=complex)
    single = z.ndim == 1
    Z = np.atleast_2d(z)
    if Z.shape[-1] != g.n:
        raise ValueError(f"expected points in C^{g.n}, got shape {z.shape}")
    A, B, c = g.poly.arrays()
    if len(c) == 0:
        vals = np.zeros(Z.shape[0], dtype=complex)
    else:
        vals = _monomial_sum(Z, A, B, c)
    r2 = np.sum(np.abs(Z) ** 2, axis=1)
    vals = vals * np.exp(-float(g.t) * r2 / 2)
    return complex(vals[0]) if single else vals


def _monomial_sum(Z, A, B, c):
    """sum_t c_t prod_j z_j^A[t,j] zbar_j^B[t,j] at points Z (N, n)."""
    N, n = Z.shape
    acc = np.zeros((N, len(c)), dtype=complex)
    acc[:] = c
    for j in range(n):
        zj = Z[:, j]
        top = int(max(A[:, j].max(), B[:, j].max()))
        pz = np.ones((N, top + 1), dtype=complex)
        for e in range(1, top + 1):
            pz[:, e] = pz[:, e - 1] * zj
        acc *= pz[:, A[:, j]] * np.conj(pz[:, B[:, j]])
    return acc.sum(axis=1)
