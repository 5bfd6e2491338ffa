"""Operator scaling and the operator Sinkhorn iteration.

The iteration keeps two positive definite matrices ``P`` and ``Q`` and
represents the scaled operator

    T_n(X) = L T(R^H X R) L^H,    P = L^H L,  Q = R^H R,

without ever forming ``L`` or ``R``.  ``T_n(I)`` is similar to ``P T(Q)`` and
``T_n^*(I)`` to ``Q T^*(P)``, so the DS defect only needs traces of those
products.  Odd steps set ``P = T(Q)^{-1}``, even steps set
``Q = T^*(P)^{-1}``.

Three arithmetic modes are offered:

* ``"exact"``: complex rationals throughout;
* ``"float"``: numpy binary64;
* ``"mp"``: mpmath with a configurable mantissa (256 bits by default).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import mpmath
import numpy as np
import scipy.optimize

from .errors import DomainError, RankDeficiencyError, ShapeError, SingularMatrixError
from .exactmat import CQ, Matrix, det_exact, inverse_exact, ldl_terms, rank_exact
from .permanents import MatrixTuple, mixed_discriminant, quantum_permanent
from .qstate import CpOperator, apply, choi, dual_apply

__all__ = [
    "MODES",
    "NumericOperator",
    "StepRecord",
    "ScalingState",
    "ScaledOperator",
    "local_scale",
    "ds_defect",
    "initial_state",
    "osi_step",
    "osi_run",
    "capacity_upper",
    "cap_tuple",
    "extract_ds_scaling",
    "indecomposability_coefficient",
    "round_psd_relative",
]

MODES = ("exact", "float", "mp")


# ---------------------------------------------------------------------------
# numeric operators


class NumericOperator:
    """Completely positive map with floating Kraus matrices ``K_k``.

    ``T(X) = sum_k K_k X K_k^H``.  Used for scalings that need square roots.
    """

    def __init__(self, kraus):
        k = np.asarray(kraus, dtype=complex)
        if k.ndim != 3 or k.shape[1] != k.shape[2]:
            raise ShapeError("kraus array must have shape (K, N, N)")
        self.kraus = k
        self.n = k.shape[1]

    @classmethod
    def from_cp(cls, t: CpOperator) -> "NumericOperator":
        return cls(_float_kraus(t))

    def apply(self, x):
        k = self.kraus
        return np.einsum("kab,bc,kdc->ad", k, np.asarray(x, dtype=complex), k.conj())

    def dual_apply(self, y):
        k = self.kraus
        return np.einsum("kba,bc,kcd->ad", k.conj(), np.asarray(y, dtype=complex), k)

    __call__ = apply

    def choi(self) -> np.ndarray:
        vecs = self.kraus.transpose(0, 2, 1).reshape(len(self.kraus), -1)
        return np.einsum("ki,kj->ij", vecs, vecs.conj())

    def ds_defect(self) -> float:
        eye = np.eye(self.n)
        a = self.apply(eye) - eye
        b = self.dual_apply(eye) - eye
        return float(np.real(np.trace(a @ a) + np.trace(b @ b)))


@lru_cache(maxsize=128)
def _float_kraus(t: CpOperator) -> np.ndarray:
    mats = [math.sqrt(w) * b.to_numpy() for w, b in t.kraus]
    if not mats:
        return np.zeros((1, t.n, t.n), dtype=complex)
    return np.array(mats, dtype=complex)


@lru_cache(maxsize=128)
def _choi_tensor(t: CpOperator) -> np.ndarray:
    """``C[i, r, j, c] = CH[i N + r, j N + c]`` as complex floats."""
    n = t.n
    return t.choi_matrix.to_numpy().astype(complex).reshape(n, n, n, n)


def _mp_kraus(t: CpOperator, ctx) -> list:
    out = []
    for w, b in t.kraus:
        s = ctx.sqrt(ctx.mpf(w.numerator) / w.denominator)
        out.append(
            ctx.matrix(
                [[s * ctx.mpc(ctx.mpf(v.re.numerator) / v.re.denominator, ctx.mpf(v.im.numerator) / v.im.denominator)
                  for v in row] for row in b.tolist()]
            )
        )
    return out


# ---------------------------------------------------------------------------
# backends: the arithmetic used by the iteration in each mode


class _ExactBackend:
    mode = "exact"

    def __init__(self, t: CpOperator):
        self.t = t
        self.n = t.n

    def eye(self):
        return Matrix.identity(self.n)

    def apply(self, x):
        return apply(self.t, x)

    def dual(self, y):
        return dual_apply(self.t, y)

    def det(self, x):
        return det_exact(x).re

    def inv(self, x):
        return inverse_exact(x)

    def rank(self, x):
        return rank_exact(x)

    def sq_defect(self, a, b):
        m = a @ b - Matrix.identity(self.n)
        return (m @ m).trace().re

    def singular(self, x, d):
        return d == 0


class _FloatBackend:
    mode = "float"

    def __init__(self, t: CpOperator, pseudo_inverse: bool = False):
        self.t = t
        self.n = t.n
        # Choi entries are rational, so no square roots enter the float run
        self.ch = _choi_tensor(t)
        self.pseudo_inverse = pseudo_inverse

    def eye(self):
        return np.eye(self.n, dtype=complex)

    def apply(self, x):
        return _herm(np.einsum("ij,irjc->rc", x, self.ch))

    def dual(self, y):
        return _herm(np.einsum("rc,jcir->ij", y, self.ch))

    def det(self, x):
        return float(np.real(np.linalg.det(x)))

    def inv(self, x):
        if self.pseudo_inverse:
            return _herm(np.linalg.pinv(x, hermitian=True))
        return _herm(np.linalg.inv(x))

    def rank(self, x):
        return int(np.linalg.matrix_rank(x, hermitian=True))

    def sq_defect(self, a, b):
        m = a @ b - np.eye(self.n)
        return float(np.real(np.trace(m @ m)))

    def singular(self, x, d):
        return not self.pseudo_inverse and np.linalg.cond(x) > 1e14


class _MpBackend:
    mode = "mp"

    def __init__(self, t: CpOperator, prec: int = 256):
        self.t = t
        self.n = t.n
        self.ctx = mpmath.MPContext()
        self.ctx.prec = prec
        self.kraus = _mp_kraus(t, self.ctx)

    def eye(self):
        return self.ctx.eye(self.n)

    def apply(self, x):
        out = self.ctx.zeros(self.n)
        for k in self.kraus:
            out += k * x * k.H
        return out

    def dual(self, y):
        out = self.ctx.zeros(self.n)
        for k in self.kraus:
            out += k.H * y * k
        return out

    def det(self, x):
        return self.ctx.re(self.ctx.det(x))

    def inv(self, x):
        return self.ctx.inverse(x)

    def rank(self, x):
        s = self.ctx.svd_c(x, compute_uv=False)
        tol = self.ctx.mpf(2) ** (-self.ctx.prec // 2) * max(s)
        return sum(1 for v in s if v > tol)

    def sq_defect(self, a, b):
        m = a * b - self.ctx.eye(self.n)
        tr = sum((m * m)[i, i] for i in range(self.n))
        return self.ctx.re(tr)

    def singular(self, x, d):
        return d == 0 or self.rank(x) < self.n


def _herm(x):
    return (x + x.conj().T) / 2


def _backend(t: CpOperator, mode: str, pseudo_inverse: bool = False, prec: int = 256):
    if mode == "exact":
        if pseudo_inverse:
            raise ValueError("pseudo_inverse is only available in float mode")
        return _ExactBackend(t)
    if mode == "float":
        return _FloatBackend(t, pseudo_inverse)
    if mode == "mp":
        if pseudo_inverse:
            raise ValueError("pseudo_inverse is only available in float mode")
        return _MpBackend(t, prec)
    raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


# ---------------------------------------------------------------------------


def local_scale(t: CpOperator, c1: Matrix, c2: Matrix) -> CpOperator:
    """``X -> C1 T(C2^H X C2) C1^H``, i.e. Kraus matrices ``C1 B_k C2^H``."""
    if c1.shape != (t.n, t.n) or c2.shape != (t.n, t.n):
        raise ShapeError(f"scaling matrices must be {t.n}x{t.n}")
    c2h = c2.H
    return CpOperator(t.n, tuple((w, c1 @ b @ c2h) for w, b in t.kraus))


def ds_defect(t, mode: str = "exact"):
    """``tr((T(I) - I)^2) + tr((T^*(I) - I)^2)``.

    Exact mode returns a :class:`~fractions.Fraction`; float mode a float.
    Accepts a :class:`CpOperator`, :class:`NumericOperator` or
    :class:`ScaledOperator`.
    """
    if isinstance(t, NumericOperator):
        return t.ds_defect()
    if isinstance(t, ScaledOperator):
        return t.ds() if mode == "exact" else float(t.ds())
    if mode == "exact":
        n = t.n
        eye = Matrix.identity(n)
        a = apply(t, eye) - eye
        b = dual_apply(t, eye) - eye
        return (a @ a).trace().re + (b @ b).trace().re
    if mode == "float":
        be = _FloatBackend(t)
        eye = be.eye()
        return be.sq_defect(eye, be.apply(eye)) + be.sq_defect(eye, be.dual(eye))
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# trajectory state


@dataclass(frozen=True)
class StepRecord:
    """One logged iteration.

    ``a`` is the factor ``det(P_n Q_n) / det(P_{n-1} Q_{n-1})`` by which every
    locally scalable functional (the quantum permanent among them) grows.
    ``cap`` is ``det(T(Q)) / det(Q)``, the value of ``det(T(X))`` at the
    unit-determinant rescaling of the current ``Q``; it is only recorded when
    ``T(Q)`` was formed.
    """

    iter: int
    ds: object
    a: object = None
    cap: object = None

    def to_json(self) -> dict:
        return {"iter": self.iter, "ds": _num_json(self.ds), "a": _num_json(self.a), "cap": _num_json(self.cap)}


def _num_json(v):
    if v is None:
        return None
    if isinstance(v, Fraction):
        return {"exact": str(v), "float": _safe_float(v)}
    return _safe_float(v)


def _safe_float(v) -> float:
    try:
        return float(v)
    except OverflowError:
        return math.inf if v > 0 else -math.inf


@dataclass(frozen=True)
class ScalingState:
    p: object
    q: object
    iter: int
    ds: object
    mode: str = "exact"
    log: tuple = field(default=(), repr=False)

    def scaled_operator(self, t: CpOperator) -> "ScaledOperator":
        if self.mode != "exact":
            raise ValueError("scaled_operator needs an exact-mode state")
        return ScaledOperator(t, self.p, self.q)

    def p_numpy(self) -> np.ndarray:
        return _to_numpy(self.p)

    def q_numpy(self) -> np.ndarray:
        return _to_numpy(self.q)


def _to_numpy(x) -> np.ndarray:
    if isinstance(x, Matrix):
        return x.to_numpy().astype(complex)
    if isinstance(x, np.ndarray):
        return x
    return np.array(x.tolist(), dtype=complex)


def initial_state(t: CpOperator, mode: str = "exact", prec: int = 256, _be=None) -> ScalingState:
    """State ``P = Q = I`` at iteration 0."""
    be = _be or _backend(t, mode, prec=prec)
    eye = be.eye()
    ti = be.apply(eye)
    ds = be.sq_defect(eye, ti) + be.sq_defect(eye, be.dual(eye))
    cap = be.det(ti)
    rec = StepRecord(0, ds, None, cap)
    return ScalingState(eye, be.eye(), 0, ds, mode, (rec,))


# ---------------------------------------------------------------------------
# exact rounding of Q


def _round_fraction(x: Fraction, bits: int, scale_ref: Fraction | None = None) -> Fraction:
    if not x:
        return x
    ref = abs(scale_ref) if scale_ref else abs(x)
    e = ref.numerator.bit_length() - ref.denominator.bit_length()
    shift = bits - e
    if shift >= 0:
        return Fraction(round(x * (1 << shift)), 1 << shift)
    return Fraction(round(x / (1 << -shift)) << -shift)


def round_psd_relative(m: Matrix, bits: int) -> Matrix:
    """Round a positive definite matrix to about ``bits`` significant bits.

    Rounds the factors of ``m = sum d_k v_k v_k^H`` (unit pivots kept exact,
    ``d_k`` kept positive) and reassembles, so the result is still positive
    definite with denominators that are powers of two.
    """
    out = Matrix.zeros(m.rows)
    for d, v in ldl_terms(m):
        dr = _round_fraction(d, bits)
        if dr <= 0:
            dr = d
        entries = []
        for z in v.entries():
            ref = max(abs(z.re), abs(z.im))
            entries.append(CQ(_round_fraction(z.re, bits, ref), _round_fraction(z.im, bits, ref)))
        vr = Matrix.column(entries)
        out = out + (vr @ vr.H).scale(dr)
    return out


# ---------------------------------------------------------------------------


def _ratio(be, new, old):
    if be.mode == "exact":
        return new / old if old else None
    if old == 0 or not new:
        return None
    return new / old


def osi_step(
    t: CpOperator,
    s: ScalingState,
    *,
    round_bits: Optional[int] = None,
    pseudo_inverse: bool = False,
    prec: int = 256,
    _be=None,
) -> ScalingState:
    """One Sinkhorn step: odd steps renormalize rows, even steps columns.

    Raises :class:`RankDeficiencyError` if the normalizer is singular.  This
    happens exactly when ``T(I)`` (odd steps) or ``T^*(I)`` (even steps) is
    singular, which certifies that ``T`` is not rank non-decreasing.

    ``round_bits`` (exact mode only) rounds ``Q`` after each even step with
    :func:`round_psd_relative`; ``P`` is never rounded, so ``T_n(I) = I``
    still holds exactly after odd steps.
    """
    be = _be or _backend(t, s.mode, pseudo_inverse, prec)
    k = s.iter + 1
    p, q = s.p, s.q
    old = be.det(p) * be.det(q)
    cap = None
    if k % 2:
        tq = be.apply(q)
        d = be.det(tq)
        if be.singular(tq, d):
            raise RankDeficiencyError(
                f"T(Q) is singular at step {k}", side="row", step=k, rank=be.rank(tq)
            )
        p = be.inv(tq)
        dq = be.det(q)
        cap = d / dq if dq else None
        ds = be.sq_defect(p, tq) + be.sq_defect(q, be.dual(p))
    else:
        tp = be.dual(p)
        d = be.det(tp)
        if be.singular(tp, d):
            raise RankDeficiencyError(
                f"T*(P) is singular at step {k}", side="column", step=k, rank=be.rank(tp)
            )
        q = be.inv(tp)
        if round_bits is not None:
            if be.mode != "exact":
                raise ValueError("round_bits only applies in exact mode")
            q = round_psd_relative(q, round_bits)
        ds = be.sq_defect(p, be.apply(q)) + be.sq_defect(q, tp)
    if be.mode == "float":
        # (P/c, cQ) describe the same operator; keep det(Q) near 1
        dq = be.det(q)
        if dq > 0 and math.isfinite(dq):
            c = dq ** (1.0 / be.n)
            p, q = p * c, q / c
    a = _ratio(be, be.det(p) * be.det(q), old)
    rec = StepRecord(k, ds, a, cap)
    return ScalingState(p, q, k, ds, s.mode, s.log + (rec,))


def osi_run(
    t: CpOperator,
    max_iter: int,
    eps,
    mode: str = "exact",
    *,
    round_bits: Optional[int] = None,
    pseudo_inverse: bool = False,
    prec: int = 256,
    state: Optional[ScalingState] = None,
) -> tuple:
    """Iterate :func:`osi_step` until ``ds <= eps`` or ``max_iter`` steps.

    Returns ``(state, reached)``.  The starting point (``P = Q = I``) is
    checked before any step is taken.
    """
    if max_iter < 0:
        raise ValueError("max_iter must be nonnegative")
    eps = Fraction(eps) if mode == "exact" else float(Fraction(eps) if isinstance(eps, str) else eps)
    be = _backend(t, mode, pseudo_inverse, prec)
    s = state if state is not None else initial_state(t, mode, prec, _be=be)
    if s.ds <= eps:
        return s, True
    while s.iter < max_iter:
        s = osi_step(t, s, round_bits=round_bits, _be=be)
        if s.ds <= eps:
            return s, True
    return s, False


# ---------------------------------------------------------------------------


class ScaledOperator:
    """The operator ``X -> L T(R^H X R) L^H`` with ``P = L^H L``, ``Q = R^H R``.

    Kept implicit because ``L`` and ``R`` are in general irrational.  The DS
    defect and the quantum permanent are still exact; :meth:`to_numeric`
    produces floating Kraus matrices through Cholesky factors.
    """

    def __init__(self, base: CpOperator, p: Matrix, q: Matrix):
        self.base = base
        self.p = p
        self.q = q
        self.n = base.n

    def unit_image_similar(self) -> Matrix:
        """``P T(Q)``, similar to the image of the identity."""
        return self.p @ apply(self.base, self.q)

    def dual_unit_image_similar(self) -> Matrix:
        """``Q T^*(P)``, similar to the dual image of the identity."""
        return self.q @ dual_apply(self.base, self.p)

    def ds(self) -> Fraction:
        eye = Matrix.identity(self.n)
        a = self.unit_image_similar() - eye
        b = self.dual_unit_image_similar() - eye
        return (a @ a).trace().re + (b @ b).trace().re

    def qp(self, formula: int = 9) -> CQ:
        base = quantum_permanent(choi(self.base), formula)
        return base * det_exact(self.p) * det_exact(self.q)

    def factors(self) -> tuple:
        """Floating ``(L, R)`` with ``L^H L = P`` and ``R^H R = Q``."""
        lp = np.linalg.cholesky(_to_numpy(self.p)).conj().T
        lq = np.linalg.cholesky(_to_numpy(self.q)).conj().T
        return lp, lq

    def to_numeric(self) -> NumericOperator:
        lp, lq = self.factors()
        k = _float_kraus(self.base)
        return NumericOperator(np.einsum("ab,kbc,dc->kad", lp, k, lq.conj()))


# ---------------------------------------------------------------------------
# capacity


def capacity_upper(t: CpOperator, trajectory: ScalingState) -> float:
    """Least logged value of ``det(T(X))`` over unit-determinant candidates.

    Every candidate is feasible for the infimum defining the capacity, so the
    result is an upper bound on it.
    """
    vals = [r.cap for r in trajectory.log if r.cap is not None]
    if not vals:
        eye = Matrix.identity(t.n)
        return float(det_exact(apply(t, eye)).re)
    return float(min(vals))


def cap_tuple(t, iters: int = 500) -> tuple:
    """Capacity of a PSD tuple, ``inf det(sum g_i Q_i)`` over ``g > 0``, ``prod g = 1``.

    Minimizes the convex function ``log det(sum exp(s_i) Q_i)`` on
    ``sum s_i = 0`` with BFGS.  Returns ``(upper, lower)`` where ``upper`` is
    the best value found and ``lower`` is the mixed discriminant, which never
    exceeds the capacity.  A zero mixed discriminant forces capacity zero, and
    ``(0.0, 0.0)`` is returned.
    """
    if not isinstance(t, MatrixTuple):
        t = MatrixTuple.of(t)
    if not t.is_psd():
        raise DomainError("cap_tuple needs a tuple of PSD matrices")
    md = mixed_discriminant(t).re
    if md == 0:
        return 0.0, 0.0
    n = t.n
    qs = np.array([m.to_numpy() for m in t.matrices], dtype=complex)

    def f(z):
        s = np.append(z, -z.sum())
        g = np.exp(s)
        m = np.einsum("i,iab->ab", g, qs)
        sign, logdet = np.linalg.slogdet(m)
        if sign.real <= 0:
            return np.inf, np.zeros_like(z)
        minv = np.linalg.inv(m)
        grad_full = g * np.real(np.einsum("ab,iba->i", minv, qs))
        return float(logdet), grad_full[:-1] - grad_full[-1]

    z0 = np.zeros(n - 1)
    if n == 1:
        return float(np.real(qs[0, 0, 0])), float(md)
    res = scipy.optimize.minimize(f, z0, jac=True, method="BFGS", options={"maxiter": iters, "gtol": 1e-12})
    upper = math.exp(min(res.fun, f(z0)[0]))
    return upper, float(md)


# ---------------------------------------------------------------------------


def _psd_power(x: np.ndarray, power: float) -> np.ndarray:
    w, v = np.linalg.eigh(_herm(x))
    if np.any(w <= 0):
        raise SingularMatrixError("matrix is not positive definite", det=float(np.prod(w)))
    return (v * w**power) @ v.conj().T


def extract_ds_scaling(t: CpOperator, c) -> tuple:
    """``S_{T(C)^{-1/2}, C^{1/2}}(T)`` and its DS defect.

    Returns ``(NumericOperator, ds)``.  When ``C`` minimizes ``det(T(C))``
    under ``det(C) = 1`` the result is doubly stochastic.
    """
    cm = _to_numpy(c) if not isinstance(c, np.ndarray) else c.astype(complex)
    op = NumericOperator.from_cp(t)
    tc = _herm(op.apply(cm))
    try:
        c1 = _psd_power(tc, -0.5)
    except SingularMatrixError:
        raise RankDeficiencyError("T(C) is singular", side="row") from None
    c2 = _psd_power(cm, 0.5)
    k = np.einsum("ab,kbc,dc->kad", c1, op.kraus, c2.conj())
    out = NumericOperator(k)
    return out, out.ds_defect()


def _traceless_hermitian_basis(n: int) -> list:
    """Frobenius-orthonormal basis of traceless hermitian ``n x n`` matrices."""
    basis = []
    for i in range(n):
        for j in range(i + 1, n):
            s = np.zeros((n, n), dtype=complex)
            s[i, j] = s[j, i] = 1 / math.sqrt(2)
            basis.append(s)
            a = np.zeros((n, n), dtype=complex)
            a[i, j] = -1j / math.sqrt(2)
            a[j, i] = 1j / math.sqrt(2)
            basis.append(a)
    for k in range(1, n):
        d = np.zeros(n)
        d[:k] = 1
        d[k] = -k
        basis.append(np.diag(d / np.linalg.norm(d)).astype(complex))
    return basis


def indecomposability_coefficient(t) -> float:
    """Smallest ``a`` with ``||T(X)||_F^2 <= a ||X||_F^2`` for traceless hermitian ``X``.

    Computed as the squared largest singular value of ``T`` restricted to the
    traceless hermitian subspace.  For doubly stochastic ``T`` a value below 1
    indicates indecomposability.
    """
    op = t if isinstance(t, NumericOperator) else NumericOperator.from_cp(t)
    n = op.n
    basis = _traceless_hermitian_basis(n)
    if not basis:
        return 0.0
    cols = []
    for b in basis:
        y = op.apply(b)
        # real coordinates of a hermitian image in a full orthonormal frame
        cols.append(np.concatenate([y.real.ravel(), y.imag.ravel()]))
    m = np.array(cols).T
    s = np.linalg.svd(m, compute_uv=False)
    return float(s[0] ** 2)
