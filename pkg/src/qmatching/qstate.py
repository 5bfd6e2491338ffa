"""Bipartite unnormalized density matrices and completely positive maps.

Index and tensor conventions used throughout the package:

* ``Budm.matrix`` is the ``N^2 x N^2`` matrix with
  ``rho(i1, i2, j1, j2) = matrix[i1*N + i2, j1*N + j2]``; block ``(i1, j1)``
  is the ``N x N`` matrix over ``(i2, j2)``.
* ``A.kron(B)`` has block ``(i, j)`` equal to ``A[i, j] * B``.
* ``vec`` stacks columns, and the Choi matrix has block ``(i, j)`` equal to
  ``T(e_i e_j^H)``.  A single Kraus term ``B`` then gives
  ``CH = vec(B) vec(B)^H``.

With these conventions the Choi matrix of the pair operator
``Z -> sum_k x_k y_k^H Z y_k x_k^H`` equals ``swap_parties`` applied to
``separable_from_pairs`` of ``(x_k, conj(y_k))``.  Both the swap and the
conjugation leave the quantum permanent unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .errors import BasisError, DimensionError, NotCompletelyPositiveError, ShapeError
from .exactmat import CQ, Matrix, as_cq, ldl_terms

__all__ = [
    "Budm",
    "CpOperator",
    "PairFamily",
    "choi",
    "operator_from_choi",
    "apply",
    "dual_apply",
    "apply_kraus",
    "dual_apply_kraus",
    "marginals",
    "separable_from_pairs",
    "cp_from_subspace_basis",
    "swap_parties",
    "decohere",
    "sk3",
    "identity_map",
    "depolarizing_map",
]


@dataclass(frozen=True)
class Budm:
    """Bipartite unnormalized density matrix on ``C^N (x) C^N``."""

    n: int
    matrix: Matrix

    def __post_init__(self):
        if self.matrix.shape != (self.n * self.n, self.n * self.n):
            raise DimensionError(f"Budm with n={self.n} needs a {self.n**2}x{self.n**2} matrix")

    @classmethod
    def from_blocks(cls, blocks: Sequence[Sequence[Matrix]]) -> "Budm":
        return cls(len(blocks), Matrix.from_blocks(blocks))

    def block(self, i: int, j: int) -> Matrix:
        n = self.n
        return self.matrix.submatrix(i * n, (i + 1) * n, j * n, (j + 1) * n)

    def entry(self, i1: int, i2: int, j1: int, j2: int) -> CQ:
        n = self.n
        return self.matrix[i1 * n + i2, j1 * n + j2]

    def is_hermitian(self) -> bool:
        return self.matrix.is_hermitian()

    def is_psd(self) -> bool:
        from .exactmat import psd_check

        return psd_check(self.matrix)

    def scale(self, c) -> "Budm":
        return Budm(self.n, self.matrix.scale(c))

    def conj(self) -> "Budm":
        return Budm(self.n, self.matrix.conj())

    def trace(self) -> CQ:
        return self.matrix.trace()


@dataclass(frozen=True)
class CpOperator:
    """Completely positive map ``X -> sum_k w_k B_k X B_k^H``.

    ``kraus`` is a tuple of ``(weight, matrix)`` pairs with positive rational
    weights.  Keeping weights apart from the matrices lets factors such as
    ``1/2`` stay exact where ``1/sqrt(2)`` would not.
    """

    n: int
    kraus: tuple = field(default=())

    def __post_init__(self):
        terms = []
        for w, b in self.kraus:
            w = Fraction(w)
            if w <= 0:
                raise ValueError(f"Kraus weights must be positive, got {w}")
            if b.shape != (self.n, self.n):
                raise DimensionError(f"Kraus matrix of shape {b.shape} in a map on M({self.n})")
            terms.append((w, b))
        object.__setattr__(self, "kraus", tuple(terms))

    @classmethod
    def from_matrices(cls, matrices: Iterable[Matrix], weights: Iterable | None = None) -> "CpOperator":
        mats = list(matrices)
        if not mats:
            raise ValueError("need at least one Kraus matrix")
        ws = [1] * len(mats) if weights is None else list(weights)
        return cls(mats[0].rows, tuple(zip(ws, mats)))

    @cached_property
    def choi_matrix(self) -> Matrix:
        n = self.n
        out = Matrix.zeros(n * n)
        for w, b in self.kraus:
            v = b.vec()
            out = out + (v @ v.H).scale(w)
        return out

    def __call__(self, x: Matrix) -> Matrix:
        return apply(self, x)

    def dual(self, y: Matrix) -> Matrix:
        return dual_apply(self, y)

    def scaled(self, c) -> "CpOperator":
        """The map ``c * T`` for a positive rational ``c``."""
        c = Fraction(c)
        return CpOperator(self.n, tuple((w * c, b) for w, b in self.kraus))

    def adjoint_operator(self) -> "CpOperator":
        """Kraus form of ``T*``."""
        return CpOperator(self.n, tuple((w, b.H) for w, b in self.kraus))

    def is_zero(self) -> bool:
        return self.choi_matrix.is_zero()


@dataclass(frozen=True)
class PairFamily:
    """``K`` distinct pairs ``(x_k, y_k)`` of nonzero vectors in ``C^N``."""

    n: int
    pairs: tuple

    def __post_init__(self):
        norm = []
        for x, y in self.pairs:
            x = _as_column(x)
            y = _as_column(y)
            if x.shape != (self.n, 1) or y.shape != (self.n, 1):
                raise DimensionError(f"pair vectors must have length {self.n}")
            if x.is_zero() or y.is_zero():
                raise ValueError("pair vectors must be nonzero")
            norm.append((x, y))
        if len(set(norm)) != len(norm):
            raise ValueError("pairs must be distinct")
        object.__setattr__(self, "pairs", tuple(norm))

    @classmethod
    def from_lists(cls, pairs: Iterable) -> "PairFamily":
        ps = [(list(x), list(y)) for x, y in pairs]
        if not ps:
            raise ValueError("use PairFamily(n, ()) for an empty family")
        return cls(len(ps[0][0]), tuple(ps))

    @property
    def k(self) -> int:
        return len(self.pairs)

    @property
    def xs(self) -> list:
        return [x for x, _ in self.pairs]

    @property
    def ys(self) -> list:
        return [y for _, y in self.pairs]

    def operator(self) -> CpOperator:
        """The separable map ``Z -> sum_k x_k y_k^H Z y_k x_k^H``."""
        return CpOperator(self.n, tuple((1, x @ y.H) for x, y in self.pairs))

    def rank_one_basis(self) -> list:
        return [x @ y.H for x, y in self.pairs]

    def conj_y(self) -> "PairFamily":
        return PairFamily(self.n, tuple((x, y.conj()) for x, y in self.pairs))


def _as_column(v) -> Matrix:
    if isinstance(v, Matrix):
        if v.cols == 1:
            return v
        if v.rows == 1:
            return v.T
        raise DimensionError("vector must be a row or column matrix")
    return Matrix.column(list(v))


# ---------------------------------------------------------------------------


def choi(t: CpOperator) -> Budm:
    """Choi matrix, block ``(i, j)`` equal to ``T(e_i e_j^H)``."""
    return Budm(t.n, t.choi_matrix)


def operator_from_choi(rho: Budm) -> CpOperator:
    """Kraus form of the map whose Choi matrix is ``rho``.

    Uses an exact rational ``L D L^H`` split, so the number of Kraus terms
    equals ``rank(rho)`` and every weight is a positive rational.
    """
    if not rho.matrix.is_hermitian():
        raise NotCompletelyPositiveError("Choi matrix is not hermitian")
    try:
        terms = ldl_terms(rho.matrix)
    except ValueError as exc:
        raise NotCompletelyPositiveError(str(exc)) from None
    return CpOperator(rho.n, tuple((d, Matrix.unvec(v, rho.n)) for d, v in terms))


def _apply_choi(ch: Matrix, x: Matrix, n: int, adjoint: bool) -> Matrix:
    n2 = n * n
    cr = ch.num_re
    ci = ch._im
    xr = x.num_re
    xi = x._im
    out_r = [0] * n2
    out_i = [0] * n2
    complex_case = ci is not None or xi is not None
    if complex_case:
        ci = ch.num_im
        xi = x.num_im
    # T(X)[r, c]  = sum_{i,j} X[i, j] * CH[i*n + r, j*n + c]
    # T*(Y)[i, j] = sum_{r,c} Y[r, c] * CH[j*n + c, i*n + r]
    for a in range(n):
        for b in range(n):
            k = a * n + b
            s_r = xr[k]
            s_i = xi[k] if complex_case else 0
            if not s_r and not s_i:
                continue
            for u in range(n):
                for v in range(n):
                    if adjoint:
                        idx = (v * n + b) * n2 + (u * n + a)
                    else:
                        idx = (a * n + u) * n2 + (b * n + v)
                    o = u * n + v
                    if complex_case:
                        c_r, c_i = cr[idx], ci[idx]
                        out_r[o] += s_r * c_r - s_i * c_i
                        out_i[o] += s_r * c_i + s_i * c_r
                    else:
                        out_r[o] += s_r * cr[idx]
    return Matrix.from_parts(n, n, out_r, out_i if complex_case else None, ch.den * x.den)


def apply(t: CpOperator, x: Matrix) -> Matrix:
    """``T(X) = sum_k w_k B_k X B_k^H``, evaluated through the Choi matrix."""
    if x.shape != (t.n, t.n):
        raise DimensionError(f"argument shape {x.shape} does not match map on M({t.n})")
    return _apply_choi(t.choi_matrix, x, t.n, adjoint=False)


def dual_apply(t: CpOperator, y: Matrix) -> Matrix:
    """``T*(Y) = sum_k w_k B_k^H Y B_k``, the adjoint for ``<X, Y> = tr(X Y^H)``."""
    if y.shape != (t.n, t.n):
        raise DimensionError(f"argument shape {y.shape} does not match map on M({t.n})")
    return _apply_choi(t.choi_matrix, y, t.n, adjoint=True)


def apply_kraus(t: CpOperator, x: Matrix) -> Matrix:
    """Literal Kraus-sum evaluation; slower reference for :func:`apply`."""
    if x.shape != (t.n, t.n):
        raise DimensionError(f"argument shape {x.shape} does not match map on M({t.n})")
    out = Matrix.zeros(t.n)
    for w, b in t.kraus:
        out = out + (b @ x @ b.H).scale(w)
    return out


def dual_apply_kraus(t: CpOperator, y: Matrix) -> Matrix:
    if y.shape != (t.n, t.n):
        raise DimensionError(f"argument shape {y.shape} does not match map on M({t.n})")
    out = Matrix.zeros(t.n)
    for w, b in t.kraus:
        out = out + (b.H @ y @ b).scale(w)
    return out


def marginals(rho: Budm) -> tuple:
    """``(rho_A, rho_B)`` with ``rho_A = sum_i A_ii`` and ``rho_B[i, j] = tr A_ij``."""
    n = rho.n
    rho_a = Matrix.zeros(n)
    for i in range(n):
        rho_a = rho_a + rho.block(i, i)
    rho_b = Matrix([[rho.block(i, j).trace() for j in range(n)] for i in range(n)])
    return rho_a, rho_b


def separable_from_pairs(p: PairFamily) -> Budm:
    """``sum_k (x_k x_k^H) (x) (y_k y_k^H)``."""
    out = Matrix.zeros(p.n * p.n)
    for x, y in p.pairs:
        out = out + (x @ x.H).kron(y @ y.H)
    return Budm(p.n, out)


def cp_from_subspace_basis(basis: Sequence[Matrix]) -> CpOperator:
    """Map ``X -> sum_k B_k X B_k^H`` whose Choi image is ``span{vec(B_k)}``."""
    mats = list(basis)
    if not mats:
        raise ValueError("empty basis")
    n = mats[0].rows
    for b in mats:
        if b.shape != (n, n):
            raise DimensionError("basis matrices must be square and of one size")
        if b.is_zero():
            raise ValueError("basis matrices must be nonzero")
    return CpOperator(n, tuple((1, b) for b in mats))


def swap_parties(rho: Budm) -> Budm:
    """Exchange the two tensor factors: ``out(i2, i1, j2, j1) = rho(i1, i2, j1, j2)``."""
    n = rho.n
    n2 = n * n
    perm = [(k % n) * n + k // n for k in range(n2)]
    m = rho.matrix
    re, im = m.num_re, m.num_im
    new_re = [0] * (n2 * n2)
    new_im = [0] * (n2 * n2)
    for r in range(n2):
        for c in range(n2):
            src = r * n2 + c
            dst = perm[r] * n2 + perm[c]
            new_re[dst] = re[src]
            new_im[dst] = im[src]
    return Budm(n, Matrix.from_parts(n2, n2, new_re, new_im, m.den))


def decohere(t: CpOperator, basis: Sequence) -> tuple:
    """The tuple ``(T(u_1 u_1^H), ..., T(u_N u_N^H))`` for an orthogonal basis."""
    us = [_as_column(u) for u in basis]
    if len(us) != t.n:
        raise BasisError(f"need {t.n} basis vectors, got {len(us)}")
    for i, u in enumerate(us):
        if u.shape != (t.n, 1):
            raise BasisError("basis vector of wrong length")
        if u.is_zero():
            raise BasisError("zero basis vector")
        for v in us[i + 1 :]:
            if (u.H @ v)[0, 0]:
                raise BasisError("basis vectors are not pairwise orthogonal")
    return tuple(apply(t, u @ u.H) for u in us)


# ---------------------------------------------------------------------------
# Named operators


def sk3() -> CpOperator:
    """The 3x3 skew-symmetric doubly stochastic map.

    Kraus matrices ``e_i e_j^T - e_j e_i^T`` for ``i < j``, each with weight 1/2.
    """
    mats = []
    for i in range(3):
        for j in range(i + 1, 3):
            a = [[0] * 3 for _ in range(3)]
            a[i][j] = 1
            a[j][i] = -1
            mats.append(Matrix(a))
    return CpOperator(3, tuple((Fraction(1, 2), m) for m in mats))


def identity_map(n: int) -> CpOperator:
    return CpOperator(n, ((1, Matrix.identity(n)),))


def depolarizing_map(n: int) -> CpOperator:
    """``X -> tr(X)/N * I`` written with the ``N^2`` matrix units."""
    terms = []
    for i in range(n):
        for j in range(n):
            e = [[0] * n for _ in range(n)]
            e[i][j] = 1
            terms.append((Fraction(1, n), Matrix(e)))
    return CpOperator(n, tuple(terms))
