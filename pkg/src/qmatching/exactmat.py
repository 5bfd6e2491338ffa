"""Exact complex-rational scalars and dense matrices.

Matrices store Gaussian-integer numerators over one common positive
denominator, reduced so that the gcd of the denominator and all numerator
parts is 1.  Determinant, rank and inverse run fraction-free (Bareiss)
elimination on the numerators, so every intermediate value is a Gaussian
integer and every division is exact.
"""

from __future__ import annotations

import math
import operator
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, ShapeError, SingularMatrixError

__all__ = [
    "CQ",
    "Matrix",
    "as_cq",
    "det_exact",
    "rank_exact",
    "inverse_exact",
    "psd_check",
    "charpoly",
    "ldl_terms",
    "cq_to_json",
    "cq_from_json",
    "matrix_to_json",
    "matrix_from_json",
]


class CQ:
    """Complex rational number ``re + im*i`` with Fraction parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if type(re) is Fraction else Fraction(re)
        self.im = im if type(im) is Fraction else Fraction(im)

    @classmethod
    def parse(cls, text: str) -> "CQ":
        """Parse ``"p/q"``, ``"p/q + r/s i"`` or ``"p/q i"`` as written by ``str``."""
        s = text.replace(" ", "")
        if not s.endswith("i"):
            return cls(Fraction(s))
        body = s[:-1]
        cut = max(body.rfind("+"), body.rfind("-"))
        if cut <= 0:
            return cls(0, Fraction(body or "1"))
        return cls(Fraction(body[:cut]), Fraction(body[cut:]))

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        o = as_cq(other)
        return CQ(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = as_cq(other)
        return CQ(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return as_cq(other) - self

    def __mul__(self, other):
        o = as_cq(other)
        if not self.im and not o.im:
            return CQ(self.re * o.re)
        return CQ(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = as_cq(other)
        n = o.abs2()
        if not n:
            raise ZeroDivisionError("division by zero complex rational")
        num = self * o.conj()
        return CQ(num.re / n, num.im / n)

    def __rtruediv__(self, other):
        return as_cq(other) / self

    def __pow__(self, k: int):
        if k < 0:
            return CQ(1) / (self**-k)
        out = CQ(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __neg__(self):
        return CQ(-self.re, -self.im)

    def conj(self) -> "CQ":
        return CQ(self.re, -self.im)

    def abs2(self) -> Fraction:
        """Squared modulus, exact."""
        return self.re * self.re + self.im * self.im

    # comparisons / conversions -------------------------------------------
    def __eq__(self, other):
        try:
            o = as_cq(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    @property
    def is_real(self) -> bool:
        return not self.im

    def __float__(self):
        if self.im:
            raise TypeError(f"{self} has a nonzero imaginary part")
        return float(self.re)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"CQ({self})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im} i"
        sign = "-" if self.im < 0 else "+"
        return f"{self.re} {sign} {abs(self.im)} i"


def as_cq(x) -> CQ:
    if type(x) is CQ:
        return x
    if isinstance(x, (int, Fraction, str)):
        if isinstance(x, str):
            return CQ.parse(x)
        return CQ(x)
    if isinstance(x, complex):
        return CQ(Fraction(x.real), Fraction(x.imag))
    if isinstance(x, float):
        return CQ(Fraction(x))
    if isinstance(x, (np.integer,)):
        return CQ(int(x))
    raise TypeError(f"cannot convert {type(x).__name__} to CQ")


# ---------------------------------------------------------------------------
# Gaussian-integer helpers used by the fraction-free kernels.  A Gaussian
# integer is a tuple (re, im) of Python ints.

def _gmul(x, y):
    return (x[0] * y[0] - x[1] * y[1], x[0] * y[1] + x[1] * y[0])


def _gsub(x, y):
    return (x[0] - y[0], x[1] - y[1])


def _gdiv(x, y):
    n = y[0] * y[0] + y[1] * y[1]
    a = x[0] * y[0] + x[1] * y[1]
    b = x[1] * y[0] - x[0] * y[1]
    qa, ra = divmod(a, n)
    qb, rb = divmod(b, n)
    if ra or rb:
        raise ArithmeticError("inexact Gaussian-integer division in Bareiss step")
    return (qa, qb)


def _gnz(x):
    return x[0] != 0 or x[1] != 0


def _idiv(x, y):
    q, r = divmod(x, y)
    if r:
        raise ArithmeticError("inexact integer division in Bareiss step")
    return q


def _inz(x):
    return x != 0


_REAL_RING = (operator.mul, operator.sub, _idiv, _inz, 0, 1)
_GAUSS_RING = (_gmul, _gsub, _gdiv, _gnz, (0, 0), (1, 0))


def _bareiss_det(a, n, ring):
    mul, sub, div, nz, zero, one = ring
    sign = 1
    prev = one
    for k in range(n - 1):
        if not nz(a[k][k]):
            for p in range(k + 1, n):
                if nz(a[p][k]):
                    a[k], a[p] = a[p], a[k]
                    sign = -sign
                    break
            else:
                return zero
        akk = a[k][k]
        rowk = a[k]
        for i in range(k + 1, n):
            rowi = a[i]
            aik = rowi[k]
            for j in range(k + 1, n):
                rowi[j] = div(sub(mul(rowi[j], akk), mul(aik, rowk[j])), prev)
        prev = akk
    d = a[n - 1][n - 1]
    if sign < 0:
        d = sub(zero, d)
    return d


def _bareiss_rank(a, rows, cols, ring):
    mul, sub, div, nz, zero, one = ring
    r = 0
    prev = one
    for c in range(cols):
        if r == rows:
            break
        for p in range(r, rows):
            if nz(a[p][c]):
                break
        else:
            continue
        a[r], a[p] = a[p], a[r]
        arc = a[r][c]
        rowr = a[r]
        for i in range(r + 1, rows):
            rowi = a[i]
            aic = rowi[c]
            for j in range(c + 1, cols):
                rowi[j] = div(sub(mul(rowi[j], arc), mul(aic, rowr[j])), prev)
            rowi[c] = zero
        prev = arc
        r += 1
    return r


def _bareiss_gauss_jordan(a, n, ring):
    """Fraction-free Gauss-Jordan on the augmented ``n x 2n`` array ``a``.

    Returns ``None`` when the left block is singular; otherwise ``a`` is left
    with a diagonal left block.
    """
    mul, sub, div, nz, zero, one = ring
    prev = one
    width = 2 * n
    for k in range(n):
        for p in range(k, n):
            if nz(a[p][k]):
                break
        else:
            return None
        a[k], a[p] = a[p], a[k]
        rowk = a[k]
        akk = rowk[k]
        for i in range(n):
            if i == k:
                continue
            rowi = a[i]
            aik = rowi[k]
            for j in range(width):
                if j == k:
                    continue
                rowi[j] = div(sub(mul(akk, rowi[j]), mul(aik, rowk[j])), prev)
            rowi[k] = zero
        prev = akk
    return a


# ---------------------------------------------------------------------------


def _lcm(a: int, b: int) -> int:
    return a // math.gcd(a, b) * b


class Matrix:
    """Immutable dense matrix of complex rationals.

    Build from nested rows of anything :func:`as_cq` accepts::

        Matrix([[1, "1/2"], [0, CQ(0, 1)]])
    """

    __slots__ = ("rows", "cols", "_re", "_im", "_den", "_hash")

    def __init__(self, data: Sequence[Sequence], cols: int | None = None):
        rows_list = [list(r) for r in data]
        nrows = len(rows_list)
        ncols = len(rows_list[0]) if nrows else (cols or 0)
        if any(len(r) != ncols for r in rows_list):
            raise DimensionError("ragged rows")
        vals = [as_cq(x) for r in rows_list for x in r]
        den = 1
        for v in vals:
            den = _lcm(den, v.re.denominator)
            den = _lcm(den, v.im.denominator)
        re = [v.re.numerator * (den // v.re.denominator) for v in vals]
        im = [v.im.numerator * (den // v.im.denominator) for v in vals]
        self._set(nrows, ncols, re, im, den)

    def _set(self, rows, cols, re, im, den):
        if den <= 0:
            raise ValueError("denominator must be positive")
        g = math.gcd(den, *re, *im) if (re or im) else den
        if g == 0:
            g = 1
        if g != 1:
            re = [x // g for x in re]
            im = [x // g for x in im]
            den //= g
        if not any(re) and not any(im):
            den = 1
        self.rows = rows
        self.cols = cols
        self._re = tuple(re)
        self._im = tuple(im) if any(im) else None
        self._den = den
        self._hash = None

    @classmethod
    def from_parts(cls, rows: int, cols: int, re: Sequence[int], im: Sequence[int] | None, den: int) -> "Matrix":
        """Build from flat row-major numerator parts over a common denominator."""
        m = cls.__new__(cls)
        m._set(rows, cols, list(re), list(im) if im is not None else [], den)
        return m

    # constructors ----------------------------------------------------------
    @classmethod
    def zeros(cls, rows: int, cols: int | None = None) -> "Matrix":
        cols = rows if cols is None else cols
        return cls.from_parts(rows, cols, [0] * (rows * cols), None, 1)

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        re = [0] * (n * n)
        for i in range(n):
            re[i * n + i] = 1
        return cls.from_parts(n, n, re, None, 1)

    @classmethod
    def diag(cls, values: Iterable) -> "Matrix":
        vals = list(values)
        n = len(vals)
        return cls([[vals[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def column(cls, values: Iterable) -> "Matrix":
        return cls([[v] for v in values])

    @classmethod
    def unit(cls, n: int, i: int) -> "Matrix":
        """Standard basis column vector ``e_i`` (0-based)."""
        re = [0] * n
        re[i] = 1
        return cls.from_parts(n, 1, re, None, 1)

    @classmethod
    def from_blocks(cls, blocks: Sequence[Sequence["Matrix"]]) -> "Matrix":
        nb = len(blocks)
        mb = len(blocks[0])
        br = blocks[0][0].rows
        bc = blocks[0][0].cols
        rows = [[None] * (mb * bc) for _ in range(nb * br)]
        for I in range(nb):
            for J in range(mb):
                b = blocks[I][J]
                if (b.rows, b.cols) != (br, bc):
                    raise DimensionError("blocks must share one shape")
                for r in range(br):
                    for c in range(bc):
                        rows[I * br + r][J * bc + c] = b[r, c]
        return cls(rows)

    # access ----------------------------------------------------------------
    @property
    def shape(self):
        return (self.rows, self.cols)

    @property
    def den(self) -> int:
        return self._den

    @property
    def num_re(self) -> tuple:
        return self._re

    @property
    def num_im(self) -> tuple:
        return self._im if self._im is not None else (0,) * len(self._re)

    @property
    def is_real(self) -> bool:
        return self._im is None

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def gaussian(self, k: int):
        """Numerator of flat entry ``k`` as a Gaussian-integer tuple."""
        return (self._re[k], self._im[k] if self._im is not None else 0)

    def __getitem__(self, idx) -> CQ:
        i, j = idx
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(idx)
        k = i * self.cols + j
        im = self._im[k] if self._im is not None else 0
        return CQ(Fraction(self._re[k], self._den), Fraction(im, self._den))

    def tolist(self) -> list:
        return [[self[i, j] for j in range(self.cols)] for i in range(self.rows)]

    def entries(self):
        """Row-major tuple of :class:`CQ` entries."""
        return tuple(self[i, j] for i in range(self.rows) for j in range(self.cols))

    def submatrix(self, r0: int, r1: int, c0: int, c1: int) -> "Matrix":
        re, im = [], []
        sim = self._im
        for i in range(r0, r1):
            base = i * self.cols
            re.extend(self._re[base + c0 : base + c1])
            if sim is not None:
                im.extend(sim[base + c0 : base + c1])
        return Matrix.from_parts(r1 - r0, c1 - c0, re, im if sim is not None else None, self._den)

    def col(self, j: int) -> "Matrix":
        return self.submatrix(0, self.rows, j, j + 1)

    def vec(self) -> "Matrix":
        """Column-stacking vectorization, as an ``rows*cols x 1`` matrix."""
        t = self.T
        return Matrix.from_parts(self.rows * self.cols, 1, t._re, t._im, t._den)

    @staticmethod
    def unvec(v: "Matrix", n: int) -> "Matrix":
        """Inverse of :meth:`vec` for an ``n x n`` result."""
        flat = Matrix.from_parts(n, n, v._re, v._im, v._den)
        return flat.T

    # structure -------------------------------------------------------------
    @property
    def T(self) -> "Matrix":
        r, c = self.rows, self.cols
        idx = [i * c + j for j in range(c) for i in range(r)]
        re = [self._re[k] for k in idx]
        im = [self._im[k] for k in idx] if self._im is not None else None
        return Matrix.from_parts(c, r, re, im, self._den)

    def conj(self) -> "Matrix":
        if self._im is None:
            return self
        return Matrix.from_parts(self.rows, self.cols, self._re, [-x for x in self._im], self._den)

    @property
    def H(self) -> "Matrix":
        """Conjugate transpose."""
        return self.T.conj()

    def is_hermitian(self) -> bool:
        return self.is_square and self == self.H

    def is_zero(self) -> bool:
        return not any(self._re) and self._im is None

    def trace(self) -> CQ:
        if not self.is_square:
            raise ShapeError("trace of a non-square matrix")
        n = self.cols
        re = sum(self._re[i * n + i] for i in range(n))
        im = sum(self._im[i * n + i] for i in range(n)) if self._im is not None else 0
        return CQ(Fraction(re, self._den), Fraction(im, self._den))

    # arithmetic ------------------------------------------------------------
    def _coerce_same_shape(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        if self.shape != other.shape:
            raise DimensionError(f"shape mismatch {self.shape} vs {other.shape}")
        return other

    def _combine(self, other, sign):
        o = self._coerce_same_shape(other)
        if o is NotImplemented:
            return o
        d = _lcm(self._den, o._den)
        a, b = d // self._den, d // o._den
        re = [x * a + sign * y * b for x, y in zip(self._re, o._re)]
        if self._im is None and o._im is None:
            im = None
        else:
            sim = self.num_im
            oim = o.num_im
            im = [x * a + sign * y * b for x, y in zip(sim, oim)]
        return Matrix.from_parts(self.rows, self.cols, re, im, d)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return Matrix.from_parts(
            self.rows, self.cols, [-x for x in self._re],
            [-x for x in self._im] if self._im is not None else None, self._den,
        )

    def scale(self, s) -> "Matrix":
        """Multiply every entry by the scalar ``s``."""
        c = as_cq(s)
        sd = _lcm(c.re.denominator, c.im.denominator)
        sr = c.re.numerator * (sd // c.re.denominator)
        si = c.im.numerator * (sd // c.im.denominator)
        if si == 0:
            re = [x * sr for x in self._re]
            im = [x * sr for x in self._im] if self._im is not None else None
        else:
            sim = self.num_im
            re = [x * sr - y * si for x, y in zip(self._re, sim)]
            im = [x * si + y * sr for x, y in zip(self._re, sim)]
        return Matrix.from_parts(self.rows, self.cols, re, im, self._den * sd)

    def __mul__(self, s):
        if isinstance(s, Matrix):
            raise TypeError("use @ for matrix products")
        return self.scale(s)

    __rmul__ = __mul__

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if not isinstance(other, Matrix):
            return NotImplemented
        if self.cols != other.rows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        r, k, c = self.rows, self.cols, other.cols
        ar = _rows(self._re, r, k)
        bc = _cols(other._re, k, c)
        rr = _imm(ar, bc)
        if self._im is None and other._im is None:
            return Matrix.from_parts(r, c, rr, None, self._den * other._den)
        ai = _rows(self.num_im, r, k)
        bi = _cols(other.num_im, k, c)
        ii = _imm(ai, bi)
        ri = _imm(ar, bi)
        ir = _imm(ai, bc)
        re = [x - y for x, y in zip(rr, ii)]
        im = [x + y for x, y in zip(ri, ir)]
        return Matrix.from_parts(r, c, re, im, self._den * other._den)

    def kron(self, other: "Matrix") -> "Matrix":
        """Tensor product with block ``(i, j)`` equal to ``self[i, j] * other``."""
        r1, c1, r2, c2 = self.rows, self.cols, other.rows, other.cols
        R, C = r1 * r2, c1 * c2
        re = [0] * (R * C)
        im = [0] * (R * C)
        ar, ai = self._re, self.num_im
        br, bi = other._re, other.num_im
        for i1 in range(r1):
            for j1 in range(c1):
                a = (ar[i1 * c1 + j1], ai[i1 * c1 + j1])
                if a == (0, 0):
                    continue
                for i2 in range(r2):
                    row = (i1 * r2 + i2) * C + j1 * c2
                    for j2 in range(c2):
                        b = (br[i2 * c2 + j2], bi[i2 * c2 + j2])
                        re[row + j2] = a[0] * b[0] - a[1] * b[1]
                        im[row + j2] = a[0] * b[1] + a[1] * b[0]
        return Matrix.from_parts(R, C, re, im, self._den * other._den)

    # equality --------------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and self._den == other._den
            and self._re == other._re
            and self._im == other._im
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.rows, self.cols, self._re, self._im, self._den))
        return self._hash

    def __repr__(self):
        body = "; ".join(", ".join(str(self[i, j]) for j in range(self.cols)) for i in range(self.rows))
        return f"Matrix[{body}]"

    # exact linear algebra ------------------------------------------------------
    def det(self) -> CQ:
        return det_exact(self)

    def rank(self) -> int:
        return rank_exact(self)

    def inverse(self) -> "Matrix":
        return inverse_exact(self)

    def to_numpy(self) -> np.ndarray:
        d = self._den
        re = [x / d for x in self._re]
        out = np.array(re, dtype=complex if self._im is not None else float)
        if self._im is not None:
            out = out + 1j * np.array([x / d for x in self._im])
        return out.reshape(self.rows, self.cols)

    # integer views used by kernels elsewhere ----------------------------------
    def _ring_rows(self):
        """Numerator rows in the cheapest ring, plus that ring."""
        n = self.cols
        if self._im is None:
            return [list(self._re[i * n : (i + 1) * n]) for i in range(self.rows)], _REAL_RING
        im = self._im
        return (
            [[(self._re[i * n + j], im[i * n + j]) for j in range(n)] for i in range(self.rows)],
            _GAUSS_RING,
        )


def _rows(flat, r, k):
    return [flat[i * k : (i + 1) * k] for i in range(r)]


def _cols(flat, k, c):
    return [flat[j::c] for j in range(c)]


def _imm(rows, cols):
    out = []
    for row in rows:
        for col in cols:
            out.append(sum(map(operator.mul, row, col)))
    return out


def _gauss_to_cq(g, den: int = 1) -> CQ:
    if isinstance(g, tuple):
        return CQ(Fraction(g[0], den), Fraction(g[1], den))
    return CQ(Fraction(g, den))


def det_exact(m: Matrix) -> CQ:
    """Exact determinant by Bareiss elimination on the integer numerators."""
    if not m.is_square:
        raise DimensionError(f"determinant of non-square {m.shape} matrix")
    n = m.rows
    if n == 0:
        return CQ(1)
    a, ring = m._ring_rows()
    d = _bareiss_det(a, n, ring)
    return _gauss_to_cq(d, m.den**n)


def rank_exact(m: Matrix) -> int:
    """Exact rank over the complex rationals."""
    if m.rows == 0 or m.cols == 0:
        return 0
    a, ring = m._ring_rows()
    return _bareiss_rank(a, m.rows, m.cols, ring)


def inverse_exact(m: Matrix) -> Matrix:
    """Exact inverse by fraction-free Gauss-Jordan.

    Raises :class:`SingularMatrixError` (with ``det == 0``) when ``m`` is
    singular.
    """
    if not m.is_square:
        raise DimensionError(f"inverse of non-square {m.shape} matrix")
    n = m.rows
    a, ring = m._ring_rows()
    zero, one = ring[4], ring[5]
    for i, row in enumerate(a):
        row.extend(one if j == i else zero for j in range(n))
    out = _bareiss_gauss_jordan(a, n, ring)
    if out is None:
        raise SingularMatrixError("matrix is singular", det=CQ(0))
    gauss = ring is _GAUSS_RING
    diag = [out[i][i] for i in range(n)]
    # m^{-1} = den * num^{-1}; num^{-1}[i][j] = right[i][j] / diag[i]
    if all(d == diag[0] for d in diag):
        d = diag[0]
        if gauss:
            dr, di = d
            norm = dr * dr + di * di
            re, im = [], []
            for i in range(n):
                for j in range(n):
                    x = out[i][n + j]
                    re.append(x[0] * dr + x[1] * di)
                    im.append(x[1] * dr - x[0] * di)
            return Matrix.from_parts(n, n, [v * m.den for v in re], [v * m.den for v in im], norm)
        if d < 0:
            re = [-out[i][n + j] * m.den for i in range(n) for j in range(n)]
            return Matrix.from_parts(n, n, re, None, -d)
        re = [out[i][n + j] * m.den for i in range(n) for j in range(n)]
        return Matrix.from_parts(n, n, re, None, d)
    rows = [[_gauss_to_cq(out[i][n + j]) / _gauss_to_cq(diag[i]) * m.den for j in range(n)] for i in range(n)]
    return Matrix(rows)


def charpoly(m: Matrix) -> list:
    """Coefficients ``[c_0, ..., c_n]`` of ``det(t I - m)`` (Faddeev-LeVerrier)."""
    if not m.is_square:
        raise ShapeError("characteristic polynomial of a non-square matrix")
    n = m.rows
    coeffs = [CQ(0)] * (n + 1)
    coeffs[n] = CQ(1)
    ident = Matrix.identity(n)
    mk = Matrix.zeros(n)
    for k in range(1, n + 1):
        mk = m @ mk + ident.scale(coeffs[n - k + 1])
        coeffs[n - k] = (m @ mk).trace() * Fraction(-1, k)
    return coeffs


def psd_check(m: Matrix) -> bool:
    """Decide ``m >= 0`` exactly for a hermitian ``m``.

    The characteristic polynomial of a hermitian matrix is real-rooted, so all
    roots are nonnegative exactly when its coefficients alternate in sign.
    """
    if not m.is_hermitian():
        raise ShapeError("psd_check needs a hermitian matrix")
    n = m.rows
    coeffs = charpoly(m)
    for k, c in enumerate(coeffs):
        if c.im:
            raise ArithmeticError("hermitian characteristic polynomial has a complex coefficient")
        if c.re * (-1) ** (n - k) < 0:
            return False
    return True


def ldl_terms(m: Matrix) -> list:
    """Rank-one decomposition ``m = sum_k d_k v_k v_k^H`` of a hermitian PSD matrix.

    Returns a list of ``(d_k, v_k)`` with ``d_k`` a positive Fraction and
    ``v_k`` a column :class:`Matrix`; there are exactly ``rank(m)`` terms.
    Raises ``ValueError`` if ``m`` is found not to be PSD.
    """
    if not m.is_hermitian():
        raise ShapeError("ldl_terms needs a hermitian matrix")
    n = m.rows
    a = [[m[i, j] for j in range(n)] for i in range(n)]
    terms = []
    live = list(range(n))
    while True:
        pivot = next((p for p in live if a[p][p]), None)
        if pivot is None:
            if any(a[i][j] for i in live for j in live):
                raise ValueError("matrix is not positive semidefinite")
            return terms
        d = a[pivot][pivot].re
        if d < 0:
            raise ValueError("matrix is not positive semidefinite")
        v = [a[i][pivot] / d if i in live else CQ(0) for i in range(n)]
        terms.append((d, Matrix.column(v)))
        for i in live:
            if not v[i]:
                continue
            for j in live:
                if v[j]:
                    a[i][j] = a[i][j] - v[i] * v[j].conj() * d
        live.remove(pivot)


# ---------------------------------------------------------------------------
# JSON encoding: entry = [[num, den], [num, den]] (real part, imaginary part)


def cq_to_json(x) -> list:
    x = as_cq(x)
    return [[str(x.re.numerator), str(x.re.denominator)], [str(x.im.numerator), str(x.im.denominator)]]


def cq_from_json(obj) -> CQ:
    """Decode an entry; integers and ``"p/q"`` strings are accepted as shorthand."""
    if isinstance(obj, bool):
        raise ValueError("boolean is not a matrix entry")
    if isinstance(obj, (int, str)):
        return as_cq(obj)
    if isinstance(obj, list) and len(obj) == 2 and all(isinstance(p, list) and len(p) == 2 for p in obj):
        (rn, rd), (inum, idn) = obj
        return CQ(Fraction(int(rn), int(rd)), Fraction(int(inum), int(idn)))
    raise ValueError(f"malformed matrix entry {obj!r}")


def matrix_to_json(m: Matrix) -> dict:
    return {
        "rows": m.rows,
        "cols": m.cols,
        "entries": [[cq_to_json(m[i, j]) for j in range(m.cols)] for i in range(m.rows)],
    }


def matrix_from_json(obj) -> Matrix:
    if isinstance(obj, list):
        return Matrix([[cq_from_json(x) for x in row] for row in obj])
    if not isinstance(obj, dict) or "entries" not in obj:
        raise ValueError("matrix must be an object with rows/cols/entries")
    rows = [[cq_from_json(x) for x in row] for row in obj["entries"]]
    m = Matrix(rows, cols=obj.get("cols"))
    if "rows" in obj and obj["rows"] != m.rows:
        raise ValueError(f"declared rows {obj['rows']} != {m.rows}")
    if "cols" in obj and obj["cols"] != m.cols:
        raise ValueError(f"declared cols {obj['cols']} != {m.cols}")
    return m
