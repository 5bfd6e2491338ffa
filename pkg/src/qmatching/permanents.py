"""Permanents, mixed discriminants, quantum and matroidal permanents.

All exact routines work on Gaussian-integer numerators over one common
denominator and divide once at the end.
"""

from __future__ import annotations

import itertools
import math
import operator
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DimensionError, ResourceLimitError
from .exactmat import (
    _GAUSS_RING,
    _REAL_RING,
    CQ,
    Matrix,
    _bareiss_det,
    _gauss_to_cq,
    _lcm,
    det_exact,
    psd_check,
)
from .qstate import Budm, PairFamily, marginals

__all__ = [
    "MatrixTuple",
    "permanent",
    "mixed_discriminant",
    "quantum_permanent",
    "matroidal_permanent",
    "barvinok_estimate",
    "qp_upper_bound",
    "signed_permutations",
    "DEFAULT_QP_CAPS",
]

# Largest N accepted by each quantum-permanent route unless overridden.
DEFAULT_QP_CAPS = {9: 7, 10: 5, 11: 5}


@dataclass(frozen=True)
class MatrixTuple:
    """An ordered tuple ``(Q_1, ..., Q_N)`` of ``N x N`` matrices."""

    n: int
    matrices: tuple

    def __post_init__(self):
        mats = tuple(self.matrices)
        if len(mats) != self.n:
            raise DimensionError(f"tuple needs exactly {self.n} matrices, got {len(mats)}")
        for m in mats:
            if m.shape != (self.n, self.n):
                raise DimensionError(f"tuple entries must be {self.n}x{self.n}")
        object.__setattr__(self, "matrices", mats)

    @classmethod
    def of(cls, matrices: Sequence[Matrix]) -> "MatrixTuple":
        mats = tuple(matrices)
        return cls(len(mats), mats)

    def is_psd(self) -> bool:
        return all(m.is_hermitian() and psd_check(m) for m in self.matrices)

    def __iter__(self):
        return iter(self.matrices)

    def __len__(self):
        return self.n


# ---------------------------------------------------------------------------
# ring helpers on Gaussian integers stored as ints (real) or (re, im) tuples


def _gadd(x, y):
    return (x[0] + y[0], x[1] + y[1])


def _gmul(x, y):
    return (x[0] * y[0] - x[1] * y[1], x[0] * y[1] + x[1] * y[0])


def _gneg(x):
    return (-x[0], -x[1])


_INT_OPS = (operator.add, operator.mul, operator.neg, 0, 1)
_GAUSS_OPS = (_gadd, _gmul, _gneg, (0, 0), (1, 0))


def _common_numerators(mats: Sequence[Matrix]):
    """Flat numerator lists of ``mats`` over one shared denominator."""
    den = 1
    for m in mats:
        den = _lcm(den, m.den)
    real = all(m.is_real for m in mats)
    out = []
    for m in mats:
        f = den // m.den
        if real:
            out.append([f * v for v in m.num_re])
        else:
            out.append([(f * a, f * b) for a, b in zip(m.num_re, m.num_im)])
    return out, den, real


def _to_cq(value, real: bool, den: int) -> CQ:
    if real:
        return CQ(Fraction(value, den))
    return _gauss_to_cq(value, den)


@lru_cache(maxsize=None)
def signed_permutations(n: int) -> tuple:
    """All permutations of ``range(n)`` in lexicographic order with their signs."""
    out = []
    for p in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if p[i] > p[j])
        out.append((p, -1 if inv & 1 else 1))
    return tuple(out)


# ---------------------------------------------------------------------------


def permanent(m: Matrix) -> CQ:
    """Permanent by Ryser's inclusion-exclusion with a Gray-code walk."""
    if not m.is_square:
        raise DimensionError("permanent needs a square matrix")
    n = m.rows
    if n == 0:
        return CQ(1)
    (num,), den, real = _common_numerators([m])
    add, mul, neg, zero, one = _INT_OPS if real else _GAUSS_OPS
    rows = [num[i * n : (i + 1) * n] for i in range(n)]
    sums = [zero] * n
    total = zero
    gray = 0
    for k in range(1, 1 << n):
        bit = (k & -k).bit_length() - 1
        gray ^= 1 << bit
        adding = bool(gray >> bit & 1)
        for i in range(n):
            v = rows[i][bit]
            sums[i] = add(sums[i], v if adding else neg(v))
        prod = one
        for s in sums:
            prod = mul(prod, s)
        if bin(gray).count("1") & 1:
            total = add(total, neg(prod))
        else:
            total = add(total, prod)
    if n & 1:
        total = neg(total)
    return _to_cq(total, real, den**n)


def _md_polarization(nums: list, n: int, real: bool):
    """Mixed discriminant numerator: ``sum_S (-1)^(N-|S|) det(sum_{i in S} Q_i)``."""
    add, _, neg, zero, _ = _INT_OPS if real else _GAUSS_OPS
    ring = _REAL_RING if real else _GAUSS_RING
    size = n * n
    acc = [zero] * size
    total = zero
    gray = 0
    for k in range(1, 1 << n):
        bit = (k & -k).bit_length() - 1
        gray ^= 1 << bit
        q = nums[bit]
        if gray >> bit & 1:
            acc = [add(a, b) for a, b in zip(acc, q)]
        else:
            acc = [add(a, neg(b)) for a, b in zip(acc, q)]
        d = _bareiss_det([acc[i * n : (i + 1) * n] for i in range(n)], n, ring)
        if (n - bin(gray).count("1")) & 1:
            total = add(total, neg(d))
        else:
            total = add(total, d)
    return total


def _md_definition(nums: list, n: int, real: bool):
    """Literal double sum over ``(sigma, tau)`` with signs."""
    add, mul, neg, zero, one = _INT_OPS if real else _GAUSS_OPS
    perms = signed_permutations(n)
    total = zero
    for s, ss in perms:
        for t, st in perms:
            prod = one
            for i in range(n):
                prod = mul(prod, nums[i][s[i] * n + t[i]])
                if prod == zero:
                    break
            total = add(total, prod if ss * st > 0 else neg(prod))
    return total


def mixed_discriminant(t, method: str = "polarization") -> CQ:
    """Mixed discriminant ``M(Q_1, ..., Q_N)``, the coefficient of
    ``x_1 ... x_N`` in ``det(x_1 Q_1 + ... + x_N Q_N)``.

    ``method`` is ``"polarization"`` (``2^N`` determinants) or
    ``"definition"`` (the signed double permutation sum).
    """
    if not isinstance(t, MatrixTuple):
        t = MatrixTuple.of(t)
    n = t.n
    if n == 0:
        return CQ(1)
    nums, den, real = _common_numerators(t.matrices)
    if method == "polarization":
        val = _md_polarization(nums, n, real)
    elif method == "definition":
        val = _md_definition(nums, n, real)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _to_cq(val, real, den**n)


# ---------------------------------------------------------------------------
# quantum permanent


def _qp_blockwise(rho: Budm):
    """Sum over sigma of sign(sigma) * M(A_{1,sigma(1)}, ..., A_{N,sigma(N)})."""
    n = rho.n
    m = rho.matrix
    real = m.is_real
    add, _, neg, zero, _ = _INT_OPS if real else _GAUSS_OPS
    n2 = n * n
    re = m.num_re
    im = m.num_im

    def block(i, j):
        out = []
        for r in range(n):
            base = (i * n + r) * n2 + j * n
            if real:
                out.extend(re[base : base + n])
            else:
                out.extend(zip(re[base : base + n], im[base : base + n]))
        return out

    blocks = [[block(i, j) for j in range(n)] for i in range(n)]
    total = zero
    for perm, sgn in signed_permutations(n):
        nums = [blocks[i][perm[i]] for i in range(n)]
        if any(all(v == zero for v in q) for q in nums):
            continue
        d = _md_polarization(nums, n, real)
        total = add(total, d if sgn > 0 else neg(d))
    return total


def _qp_triple(rho: Budm):
    """Sum over (tau_1, tau_2, tau_3) of signs times prod_i rho(i, tau_1 i, tau_2 i, tau_3 i)."""
    n = rho.n
    m = rho.matrix
    real = m.is_real
    add, mul, neg, zero, one = _INT_OPS if real else _GAUSS_OPS
    n2 = n * n
    flat = list(m.num_re) if real else list(zip(m.num_re, m.num_im))
    total = [zero]

    def rec(i, u1, u2, u3, sign, prod):
        if i == n:
            total[0] = add(total[0], prod if sign > 0 else neg(prod))
            return
        row0 = i * n
        for a in range(n):
            if u1 >> a & 1:
                continue
            s1 = sign * (-1 if bin(u1 >> (a + 1)).count("1") & 1 else 1)
            for b in range(n):
                if u2 >> b & 1:
                    continue
                s2 = s1 * (-1 if bin(u2 >> (b + 1)).count("1") & 1 else 1)
                base = (row0 + a) * n2 + b * n
                for c in range(n):
                    if u3 >> c & 1:
                        continue
                    v = flat[base + c]
                    if v == zero:
                        continue
                    s3 = s2 * (-1 if bin(u3 >> (c + 1)).count("1") & 1 else 1)
                    rec(i + 1, u1 | 1 << a, u2 | 1 << b, u3 | 1 << c, s3, mul(prod, v))

    rec(0, 0, 0, 0, 1, one)
    return total[0]


def _qp_quadruple(rho: Budm):
    """Sum over four permutations of signs times prod_i rho(t1 i, t2 i, t3 i, t4 i).

    Returns ``N!`` times the quantum permanent numerator.
    """
    n = rho.n
    m = rho.matrix
    real = m.is_real
    add, mul, neg, zero, one = _INT_OPS if real else _GAUSS_OPS
    n2 = n * n
    flat = list(m.num_re) if real else list(zip(m.num_re, m.num_im))
    total = [zero]

    def par(mask, v):
        return -1 if bin(mask >> (v + 1)).count("1") & 1 else 1

    def rec(i, u0, u1, u2, u3, sign, prod):
        if i == n:
            total[0] = add(total[0], prod if sign > 0 else neg(prod))
            return
        for a in range(n):
            if u0 >> a & 1:
                continue
            s0 = sign * par(u0, a)
            for b in range(n):
                if u1 >> b & 1:
                    continue
                s1 = s0 * par(u1, b)
                row = (a * n + b) * n2
                for c in range(n):
                    if u2 >> c & 1:
                        continue
                    s2 = s1 * par(u2, c)
                    base = row + c * n
                    for d in range(n):
                        if u3 >> d & 1:
                            continue
                        v = flat[base + d]
                        if v == zero:
                            continue
                        rec(
                            i + 1,
                            u0 | 1 << a,
                            u1 | 1 << b,
                            u2 | 1 << c,
                            u3 | 1 << d,
                            s2 * par(u3, d),
                            mul(prod, v),
                        )

    rec(0, 0, 0, 0, 0, 1, one)
    return total[0]


def quantum_permanent(rho: Budm, formula: int = 9, max_n: int | None = None) -> CQ:
    """Quantum permanent of a bipartite block matrix.

    ``formula`` picks the evaluation route:

    * ``9``: signed sum over ``sigma`` of mixed discriminants of the blocks
      ``A_{i, sigma(i)}`` (polarization, ``N! 2^N`` determinants);
    * ``10``: the triple signed permutation sum;
    * ``11``: the quadruple signed permutation sum divided by ``N!``.

    All three agree exactly.  Routes 10 and 11 are literal sums meant as
    cross-checks; route 11 is only practical for ``N <= 4`` on dense input.
    ``max_n`` overrides the size cap in :data:`DEFAULT_QP_CAPS`.
    """
    if formula not in DEFAULT_QP_CAPS:
        raise ValueError(f"formula must be 9, 10 or 11, got {formula!r}")
    cap = DEFAULT_QP_CAPS[formula] if max_n is None else max_n
    n = rho.n
    if n > cap:
        raise ResourceLimitError(f"quantum permanent with N={n} exceeds the cap {cap} for formula {formula}")
    real = rho.matrix.is_real
    den = rho.matrix.den**n
    if formula == 9:
        val = _qp_blockwise(rho)
    elif formula == 10:
        val = _qp_triple(rho)
    else:
        val = _qp_quadruple(rho)
        den *= math.factorial(n)
    return _to_cq(val, real, den)


# ---------------------------------------------------------------------------
# matroidal permanent and its estimator


def matroidal_permanent(p: PairFamily) -> Fraction:
    """Sum over ``N``-subsets of ``det(sum x x^H) det(sum y y^H)``.

    By Cauchy-Binet each Gram determinant equals ``|det [x_{i_1} ... x_{i_N}]|^2``,
    which is what gets evaluated.
    """
    n = p.n
    if p.k < n:
        return Fraction(0)
    total = Fraction(0)
    xs = p.xs
    ys = p.ys
    for subset in itertools.combinations(range(p.k), n):
        dx = det_exact(Matrix.from_blocks([[xs[i] for i in subset]]))
        if not dx:
            continue
        dy = det_exact(Matrix.from_blocks([[ys[i] for i in subset]]))
        if not dy:
            continue
        total += dx.abs2() * dy.abs2()
    return total


def barvinok_estimate(p: PairFamily, samples: int, seed: int = 0, batch: int = 4096) -> tuple:
    """Monte Carlo estimate of the matroidal permanent.

    Each sample draws independent phases ``xi_k`` uniform on the unit circle
    and records ``|det(sum_k xi_k x_k y_k^H)|^2``.  Returns ``(mean, stderr)``.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    n = p.n
    if p.k == 0:
        return 0.0, 0.0
    xm = np.array([[complex(v) for v in x.entries()] for x in p.xs]).T  # N x K
    ym = np.array([[complex(v) for v in y.entries()] for y in p.ys]).T
    rng = np.random.default_rng(seed)
    vals = np.empty(samples)
    done = 0
    while done < samples:
        b = min(batch, samples - done)
        xi = np.exp(2j * np.pi * rng.random((b, p.k)))
        mats = np.einsum("ik,bk,jk->bij", xm, xi, ym.conj())
        vals[done : done + b] = np.abs(np.linalg.det(mats)) ** 2 if n else 1.0
        done += b
    mean = float(vals.mean())
    stderr = float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return mean, stderr


# ---------------------------------------------------------------------------


def qp_upper_bound(rho: Budm) -> tuple:
    """``(N! * M(A_11, ..., A_NN), N! * det(rho_A))``.

    For a PSD ``rho`` these satisfy ``QP(rho) <= first <= second``.
    """
    n = rho.n
    f = math.factorial(n)
    diag = MatrixTuple(n, tuple(rho.block(i, i) for i in range(n)))
    rho_a, _ = marginals(rho)
    return mixed_discriminant(diag) * f, det_exact(rho_a) * f
