"""Classical oracles for matroid intersection and subspace rank."""

from __future__ import annotations

import itertools
import random
from typing import Sequence

from .errors import ResourceLimitError
from .exactmat import Matrix, rank_exact
from .qstate import PairFamily

__all__ = ["DEFAULT_PAIR_CAP", "mi_rank_bruteforce", "edmonds_rado_check", "lin_rank_randomized", "COEFF_BOUND"]

DEFAULT_PAIR_CAP = 12
COEFF_BOUND = 1 << 16


def _span_rank(vectors: list) -> int:
    if not vectors:
        return 0
    return rank_exact(Matrix.from_blocks([vectors]))


def _check_cap(p: PairFamily, cap: int):
    if p.k > cap:
        raise ResourceLimitError(f"{p.k} pairs exceed the enumeration cap {cap}")


def mi_rank_bruteforce(p: PairFamily, cap: int = DEFAULT_PAIR_CAP) -> int:
    """Largest ``m`` such that some ``m`` pairs have independent x's and independent y's."""
    _check_cap(p, cap)
    xs, ys = p.xs, p.ys
    for m in range(min(p.n, p.k), 0, -1):
        for subset in itertools.combinations(range(p.k), m):
            if _span_rank([xs[i] for i in subset]) == m and _span_rank([ys[i] for i in subset]) == m:
                return m
    return 0


def edmonds_rado_check(p: PairFamily, cap: int = DEFAULT_PAIR_CAP) -> tuple:
    """Check ``dim span{x_i : i in A} + dim span{y_j : j not in A} >= N`` for all ``A``.

    Returns ``(True, None)`` when every subset passes, otherwise ``(False, A)``
    with ``A`` a violating subset of 0-based indices of least size (ties broken
    lexicographically).
    """
    _check_cap(p, cap)
    xs, ys = p.xs, p.ys
    everything = range(p.k)
    for size in range(p.k + 1):
        for a in itertools.combinations(everything, size):
            inside = set(a)
            rx = _span_rank([xs[i] for i in a])
            ry = _span_rank([ys[j] for j in everything if j not in inside])
            if rx + ry < p.n:
                return False, a
    return True, None


def lin_rank_randomized(basis: Sequence[Matrix], trials: int = 20, seed: int = 0) -> int:
    """Largest rank seen among random integer combinations of ``basis``.

    Coefficients are uniform in ``[-2^16, 2^16]``.  The result never exceeds
    the maximal rank in the span and equals it with high probability.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    mats = list(basis)
    if not mats:
        return 0
    rng = random.Random(seed)
    best = 0
    full = min(mats[0].shape)
    for _ in range(trials):
        m = Matrix.zeros(*mats[0].shape)
        for b in mats:
            m = m + b.scale(rng.randint(-COEFF_BOUND, COEFF_BOUND))
        best = max(best, rank_exact(m))
        if best == full:
            break
    return best
