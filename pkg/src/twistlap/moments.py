"""Exact Gaussian moments, inner products and even-p norms."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .hermite_core import CQ, CPoly, GaussianFn

__all__ = [
    "ExactValue",
    "gaussian_moment",
    "inner_exact",
    "lp_norm_exact_even",
]


@dataclass(frozen=True)
class ExactValue:
    """``(rational + i*imag) * pi**pi_power`` with exact rational parts.

    Zero is normalized to ``pi_power == 0`` so equality is structural.
    """

    rational: Fraction
    pi_power: int = 0
    imag: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "rational", Fraction(self.rational))
        object.__setattr__(self, "imag", Fraction(self.imag))
        object.__setattr__(self, "pi_power", int(self.pi_power))
        if self.rational == 0 and self.imag == 0:
            object.__setattr__(self, "pi_power", 0)

    @classmethod
    def zero(cls) -> "ExactValue":
        return cls(Fraction(0))

    @classmethod
    def from_cq(cls, c: CQ, pi_power: int = 0) -> "ExactValue":
        return cls(c.re, pi_power, c.im)

    @property
    def coeff(self) -> CQ:
        return CQ(self.rational, self.imag)

    def is_zero(self) -> bool:
        return self.rational == 0 and self.imag == 0

    def is_real(self) -> bool:
        return self.imag == 0

    def __add__(self, other: "ExactValue") -> "ExactValue":
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if self.pi_power != other.pi_power:
            raise ValueError(
                f"cannot add exact values with pi powers {self.pi_power} and {other.pi_power}"
            )
        return ExactValue(self.rational + other.rational, self.pi_power, self.imag + other.imag)

    def __neg__(self):
        return ExactValue(-self.rational, self.pi_power, -self.imag)

    def __sub__(self, other: "ExactValue") -> "ExactValue":
        return self + (-other)

    def __mul__(self, other) -> "ExactValue":
        if isinstance(other, ExactValue):
            c = self.coeff * other.coeff
            return ExactValue(c.re, self.pi_power + other.pi_power, c.im)
        c = self.coeff * CQ.coerce(other)
        return ExactValue(c.re, self.pi_power, c.im)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ExactValue":
        if isinstance(other, ExactValue):
            c = self.coeff / other.coeff
            return ExactValue(c.re, self.pi_power - other.pi_power, c.im)
        c = self.coeff / CQ.coerce(other)
        return ExactValue(c.re, self.pi_power, c.im)

    def __pow__(self, e: int) -> "ExactValue":
        if not isinstance(e, int):
            raise TypeError("only integer powers are exact")
        if e < 0:
            return ExactValue(1) / (self ** (-e))
        out = ExactValue(1)
        for _ in range(e):
            out = out * self
        return out

    def conj(self) -> "ExactValue":
        return ExactValue(self.rational, self.pi_power, -self.imag)

    def __float__(self) -> float:
        if self.imag:
            raise TypeError("complex ExactValue; use complex()")
        if not self.rational:
            return 0.0
        mag = math.exp(ExactValue(abs(self.rational), self.pi_power).log())
        return mag if self.rational > 0 else -mag

    def __complex__(self) -> complex:
        scale = math.pi**self.pi_power
        return complex(float(self.rational) * scale, float(self.imag) * scale)

    def log(self) -> float:
        """Natural log of a positive real value, safe for huge numerators."""
        if self.imag or self.rational <= 0:
            raise ValueError(f"log of non-positive value {self}")
        # math.log accepts arbitrarily large ints
        num, den = self.rational.numerator, self.rational.denominator
        return math.log(num) - math.log(den) + self.pi_power * math.log(math.pi)

    def to_dict(self) -> dict:
        out = {"rational": str(self.rational), "pi_power": self.pi_power}
        if self.imag:
            out["imag"] = str(self.imag)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExactValue":
        return cls(
            Fraction(data["rational"]), int(data.get("pi_power", 0)), Fraction(data.get("imag", "0"))
        )

    def __str__(self):
        c = str(self.rational) if not self.imag else f"({self.rational} + {self.imag}i)"
        if self.pi_power == 0:
            return c
        return f"{c}*pi^{self.pi_power}"


def gaussian_moment(a, b, t=1) -> ExactValue:
    """``int_{C^n} z^a zbar^b exp(-t |z|^2) dz``.

    Zero unless ``a == b``; otherwise ``prod_j pi * a_j! / t^(a_j + 1)``.
    """
    t = Fraction(t)
    if t <= 0:
        raise ValueError(f"moment width must be positive, got {t}")
    a, b = tuple(a), tuple(b)
    if len(a) != len(b):
        raise ValueError("exponent length mismatch")
    if a != b:
        return ExactValue.zero()
    val = Fraction(1)
    for aj in a:
        val *= Fraction(math.factorial(aj)) / t ** (aj + 1)
    return ExactValue(val, len(a))


def inner_exact(g: GaussianFn, h: GaussianFn) -> ExactValue:
    """``<g, h> = int g * conj(h)`` over C^n."""
    if g.n != h.n:
        raise ValueError(f"dimension mismatch: {g.n} vs {h.n}")
    s = (g.t + h.t) / 2
    # only pairs with a_g + b_h == b_g + a_h contribute; bucket by a - b
    buckets: dict = {}
    for (a, b), c in h.poly.terms.items():
        shift = tuple(x - y for x, y in zip(a, b))
        buckets.setdefault(shift, []).append((a, b, c.conj()))
    total = CQ(0)
    inv_s = 1 / s
    for (a, b), c in g.poly.terms.items():
        shift = tuple(x - y for x, y in zip(a, b))
        for ah, bh, ch in buckets.get(shift, ()):
            # g term z^a zbar^b times conj(h term) z^bh zbar^ah
            w = Fraction(1)
            for x, y in zip(a, bh):
                e = x + y
                w *= math.factorial(e) * inv_s ** (e + 1)
            total = total + c * ch * w
    return ExactValue.from_cq(total, g.n)


def lp_norm_exact_even(g: GaussianFn, p: int) -> ExactValue:
    """``||g||_p^p`` for even integer ``p >= 2``, exactly.

    The p-th root is left to the caller; see :meth:`ExactValue.log`.
    """
    if isinstance(p, float) and p.is_integer():
        p = int(p)
    if not isinstance(p, int) or p < 2 or p % 2:
        raise ValueError(f"exact L^p norms need an even integer p >= 2, got {p!r}")
    s = g.t * p / 2
    gg = g.poly * g.poly.conj()
    acc = CPoly.const(g.n)
    for _ in range(p // 2 - 1):
        acc = acc * gg
    # last factor: only the diagonal part of acc * gg is integrated
    total = CQ(0)
    inv_s = 1 / s
    buckets: dict = {}
    for (a, b), c in gg.terms.items():
        buckets.setdefault(tuple(y - x for x, y in zip(a, b)), []).append((a, c))
    for (a, b), c in acc.terms.items():
        shift = tuple(x - y for x, y in zip(a, b))
        for a2, c2 in buckets.get(shift, ()):
            w = Fraction(1)
            for x, y in zip(a, a2):
                e = x + y
                w *= math.factorial(e) * inv_s ** (e + 1)
            total = total + c * c2 * w
    if total.im:
        raise ArithmeticError("|g|^p integral has an imaginary part; arithmetic bug")
    return ExactValue(total.re, g.n)
