import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from twistlap.hermite_core import CQ, CPoly, GaussianFn

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@st.composite
def cpolys(draw, n=None, max_deg=6, max_terms=6):
    n = draw(st.integers(1, 3)) if n is None else n
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        a = tuple(draw(st.integers(0, max_deg // (2 * n) + 1)) for _ in range(n))
        b = tuple(draw(st.integers(0, max_deg // (2 * n) + 1)) for _ in range(n))
        if sum(a) + sum(b) > max_deg:
            continue
        re = Fraction(draw(st.integers(-5, 5)), draw(st.integers(1, 4)))
        im = Fraction(draw(st.integers(-5, 5)), draw(st.integers(1, 4)))
        terms[(a, b)] = CQ(re, im)
    return CPoly(n, terms)


@st.composite
def gaussian_fns(draw, n=None, max_deg=6, max_terms=6):
    return GaussianFn(draw(cpolys(n=n, max_deg=max_deg, max_terms=max_terms)))


def random_gfn(rng: random.Random, n: int, max_deg: int, max_terms: int = 6) -> GaussianFn:
    """Seeded random polynomial-Gaussian with small Gaussian-rational coefficients."""
    terms = {}
    for _ in range(max_terms):
        deg = rng.randint(0, max_deg)
        cuts = sorted(rng.randint(0, deg) for _ in range(2 * n - 1))
        parts = [b - a for a, b in zip([0] + cuts, cuts + [deg])]
        a, b = tuple(parts[:n]), tuple(parts[n:])
        terms[(a, b)] = CQ(Fraction(rng.randint(-4, 4), rng.randint(1, 3)), rng.randint(-3, 3))
    return GaussianFn(CPoly(n, terms))


@pytest.fixture
def rng():
    return random.Random(20240601)


# acceptance reporting: one line per criterion in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
