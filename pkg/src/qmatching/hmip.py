"""Deterministic decision procedure for hidden matroid intersection.

Given a subspace ``L`` of ``N x N`` matrices that is promised to be spanned by
rank-one matrices, decide whether ``L`` contains a nonsingular matrix.  The
subspace is encoded as the completely positive map
``X -> sum_k B_k X B_k^H`` over a basis ``B_k``; under the promise, ``L``
contains a nonsingular matrix exactly when that map is rank non-decreasing,
and operator Sinkhorn scaling decides the latter.

A MATCHING verdict is only issued at a state where one of ``T_n(I) = I`` or
``T_n^*(I) = I`` holds exactly and ``DS(T_n) <= 1/N``; such an operator is
rank non-decreasing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .errors import DegenerateInputError, RankDeficiencyError
from .exactmat import Matrix, inverse_exact, rank_exact
from .qstate import Budm, CpOperator, PairFamily, apply, cp_from_subspace_basis, dual_apply, operator_from_choi
from .scaling import ScaledOperator, ScalingState, _backend, initial_state, osi_step

__all__ = [
    "MATCHING",
    "NOT_MATCHING",
    "DEFAULT_ROUND_BITS",
    "HmipInstance",
    "HmipVerdict",
    "iteration_bound",
    "decide_matching",
    "first_step_normalization",
]

MATCHING = "MATCHING"
NOT_MATCHING = "NOT_MATCHING"

# Significant bits kept in Q after each column step of an exact decision.
DEFAULT_ROUND_BITS = 64


@dataclass(frozen=True)
class HmipInstance:
    """A decision instance, integerized.

    ``operator`` is the input map multiplied by the least common multiple of
    its Choi denominators, so every Choi entry is a Gaussian integer of
    magnitude at most ``q_max``.  ``separable`` selects the tighter iteration
    bound; ``weakly_separable`` records the caller's promise and only affects
    how the verdict is phrased.
    """

    n: int
    kind: str
    operator: CpOperator
    q_max: int
    multiplier: int = 1
    separable: bool = False
    weakly_separable: bool = True
    source: object = field(default=None, compare=False, repr=False)

    @classmethod
    def from_operator(
        cls, t: CpOperator, *, kind: str = "kraus", separable: bool = False, weakly_separable: bool = True, source=None
    ) -> "HmipInstance":
        ch = t.choi_matrix
        mult = ch.den
        scaled = t.scaled(mult) if mult != 1 else t
        num_re = ch.num_re
        num_im = ch.num_im
        q = 0
        for a, b in zip(num_re, num_im):
            if b:
                q = max(q, math.isqrt(a * a + b * b - 1) + 1)
            else:
                q = max(q, abs(a))
        return cls(t.n, kind, scaled, q, mult, separable, weakly_separable or separable, source)

    @classmethod
    def from_pairs(cls, p: PairFamily) -> "HmipInstance":
        if p.k == 0:
            raise DegenerateInputError("empty pair family")
        return cls.from_operator(p.operator(), kind="pairs", separable=True, source=p)

    @classmethod
    def from_subspace(cls, basis: Sequence[Matrix], *, separable: bool = False) -> "HmipInstance":
        return cls.from_operator(cp_from_subspace_basis(basis), kind="subspace", separable=separable, source=tuple(basis))

    @classmethod
    def from_choi(cls, rho: Budm, *, separable: bool = False) -> "HmipInstance":
        return cls.from_operator(operator_from_choi(rho), kind="choi", separable=separable, source=rho)


@dataclass(frozen=True)
class HmipVerdict:
    decision: str
    iterations_used: int
    bound_L: int
    final_ds: object
    threshold: object
    certificate: dict
    log: tuple = field(default=(), repr=False)
    interpretation: Optional[str] = None

    @property
    def matching(self) -> bool:
        return self.decision == MATCHING

    def to_json(self) -> dict:
        out = {
            "decision": self.decision,
            "iterations_used": self.iterations_used,
            "bound_L": self.bound_L,
            "final_ds": _jnum(self.final_ds),
            "threshold": _jnum(self.threshold),
            "certificate": self.certificate,
        }
        if self.interpretation:
            out["interpretation"] = self.interpretation
        return out


def _jnum(v):
    if isinstance(v, Fraction):
        try:
            fl = float(v)
        except OverflowError:
            fl = math.inf
        return {"exact": str(v), "float": fl}
    return v


def iteration_bound(n: int, q: int, separable: bool = False) -> int:
    """Upper bound on the number of scaling steps needed for a matching instance.

    ``ceil(3N(N ln N + N(ln N + ln q))) + 1`` in general and
    ``ceil(3N * N(ln N + ln q)) + 1`` for separable instances.
    """
    if n < 1 or q < 1:
        raise ValueError("n and q must be positive")
    if n == 1:
        return 1
    ln_n = math.log(n)
    inner = n * (ln_n + math.log(q))
    if not separable:
        inner += n * ln_n
    return math.ceil(3 * n * inner) + 1


def _one_sided_exact(t: CpOperator, s: ScalingState, rounded: bool) -> bool:
    if s.iter == 0:
        eye = Matrix.identity(t.n)
        return apply(t, eye) == eye or dual_apply(t, eye) == eye
    return s.iter % 2 == 1 or not rounded


def decide_matching(
    inst: HmipInstance,
    *,
    mode: str = "exact",
    round_bits: Optional[int] = DEFAULT_ROUND_BITS,
    max_iter: Optional[int] = None,
) -> HmipVerdict:
    """Decide whether the instance is rank non-decreasing (a matching).

    Exact mode certifies MATCHING once ``DS(T_n) <= 1/N`` at a state where
    ``T_n(I) = I`` or ``T_n^*(I) = I`` holds exactly.  Float mode uses the
    threshold ``1/(2N+1)`` at every step.  NOT_MATCHING is returned when a
    normalizer is singular or when ``bound_L`` steps pass without success.
    ``round_bits=None`` disables rounding of ``Q``.
    """
    t = inst.operator
    n = inst.n
    if t.is_zero():
        raise DegenerateInputError("the instance operator is zero")
    bound = iteration_bound(n, max(inst.q_max, 1), inst.separable)
    limit = bound if max_iter is None else min(bound, max_iter)
    if mode == "exact":
        threshold = Fraction(1, n)
        rb = round_bits
    else:
        threshold = 1.0 / (2 * n + 1)
        rb = None
    be = _backend(t, mode)
    s = initial_state(t, mode, _be=be)

    def verdict(decision, cert):
        text = None
        if inst.weakly_separable:
            text = (
                "the subspace contains a nonsingular matrix"
                if decision == MATCHING
                else "the subspace contains no nonsingular matrix"
            )
        return HmipVerdict(decision, s.iter, bound, s.ds, threshold, cert, s.log, text)

    def certified():
        if s.ds > threshold:
            return False
        return mode != "exact" or _one_sided_exact(t, s, rb is not None)

    if certified():
        return verdict(MATCHING, {"type": "ds_threshold", "step": s.iter})
    while s.iter < limit:
        try:
            s = osi_step(t, s, round_bits=rb, _be=be)
        except RankDeficiencyError as exc:
            return verdict(
                NOT_MATCHING,
                {"type": "singular_normalizer", "step": exc.step, "side": exc.side, "rank": exc.rank},
            )
        if certified():
            return verdict(MATCHING, {"type": "ds_threshold", "step": s.iter})
    return verdict(NOT_MATCHING, {"type": "iteration_bound", "steps": s.iter})


def first_step_normalization(inst) -> ScaledOperator:
    """The row-normalized operator ``T_1`` with ``T_1(I) = I``.

    Returned in implicit form ``(T, P = T(I)^{-1}, Q = I)``.  Its quantum
    permanent is ``QP(CH(T)) / det(T(I))``.  A singular ``T(I)`` raises
    :class:`RankDeficiencyError`, whose ``rank`` attribute is the witness
    that the operator is not rank non-decreasing.
    """
    t = inst.operator if isinstance(inst, HmipInstance) else inst
    eye = Matrix.identity(t.n)
    ti = apply(t, eye)
    r = rank_exact(ti)
    if r < t.n:
        raise RankDeficiencyError(f"T(I) has rank {r} < {t.n}", side="row", step=1, rank=r)
    return ScaledOperator(t, inverse_exact(ti), eye)
