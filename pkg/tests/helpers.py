"""Random instance builders and hypothesis strategies shared by the tests."""

from __future__ import annotations

import random
from fractions import Fraction

from hypothesis import strategies as st

from qmatching.exactmat import CQ, Matrix
from qmatching.qstate import Budm, CpOperator, PairFamily


def rand_matrix(rng: random.Random, rows: int, cols: int | None = None, lo=-3, hi=3, complex_=False, den=1) -> Matrix:
    cols = rows if cols is None else cols
    out = []
    for _ in range(rows):
        row = []
        for _ in range(cols):
            re = Fraction(rng.randint(lo, hi), rng.randint(1, den))
            im = Fraction(rng.randint(lo, hi), rng.randint(1, den)) if complex_ else 0
            row.append(CQ(re, im))
        out.append(row)
    return Matrix(out)


def rand_psd(rng: random.Random, n: int, rank: int | None = None, complex_=False, den=1) -> Matrix:
    b = rand_matrix(rng, n, rank or n, complex_=complex_, den=den)
    return b @ b.H


def rand_budm(rng: random.Random, n: int, complex_=False, den=1, rank=None) -> Budm:
    return Budm(n, rand_psd(rng, n * n, rank=rank, complex_=complex_, den=den))


def rand_pairs(rng: random.Random, n: int, k: int, lo=-3, hi=3, complex_=False) -> PairFamily:
    pairs = []
    while len(pairs) < k:
        if complex_:
            x = [complex(rng.randint(lo, hi), rng.randint(lo, hi)) for _ in range(n)]
            y = [complex(rng.randint(lo, hi), rng.randint(lo, hi)) for _ in range(n)]
        else:
            x = [rng.randint(lo, hi) for _ in range(n)]
            y = [rng.randint(lo, hi) for _ in range(n)]
        if any(x) and any(y) and (x, y) not in pairs:
            pairs.append((x, y))
    return PairFamily(n, tuple(pairs))


def rand_operator(rng: random.Random, n: int, k: int = 2, complex_=True) -> CpOperator:
    mats = [rand_matrix(rng, n, complex_=complex_) for _ in range(k)]
    weights = [Fraction(rng.randint(1, 4), rng.randint(1, 3)) for _ in range(k)]
    return CpOperator(n, tuple(zip(weights, mats)))


def unit(n: int, i: int) -> list:
    return [1 if j == i else 0 for j in range(n)]


# hypothesis strategies -------------------------------------------------------

small_fraction = st.builds(Fraction, st.integers(-4, 4), st.integers(1, 3))


@st.composite
def cq_values(draw, complex_=True):
    re = draw(small_fraction)
    im = draw(small_fraction) if complex_ else Fraction(0)
    return CQ(re, im)


@st.composite
def matrices(draw, n=None, max_n=4, complex_=True):
    n = n if n is not None else draw(st.integers(1, max_n))
    return Matrix([[draw(cq_values(complex_)) for _ in range(n)] for _ in range(n)])


@st.composite
def seeds(draw):
    return draw(st.integers(0, 2**31 - 1))
