"""The block gadget ``C`` built from symmetric matrices and its optimization identity.

For real symmetric ``A_1, ..., A_{M-1}`` the gadget is the ``MN x MN`` matrix
whose ``N x N`` blocks are ``A_j`` at positions ``(0, j)`` and ``(j, 0)`` and
zero elsewhere.  For a unit vector ``y`` the ``M x M`` matrix
``A(y)[i, j] = y^T C_ij y`` has only two nonzero eigenvalues ``+-||a(y)||``
with ``a_i = y^T A_i y``, hence ``lambda_max(A(y)) = sqrt(sum_i a_i^2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, DomainError, ResourceLimitError
from .exactmat import Matrix

__all__ = [
    "Gadget",
    "GadgetScan",
    "build_gadget",
    "gadget_matrix",
    "gadget_value_lhs",
    "gadget_value_rhs",
    "scan",
    "sphere_grid",
    "pointwise_gap",
]


@dataclass(frozen=True)
class Gadget:
    m: int
    n: int
    a_list: tuple

    def __post_init__(self):
        mats = tuple(self.a_list)
        if len(mats) != self.m - 1:
            raise DimensionError(f"need {self.m - 1} matrices for M={self.m}")
        for a in mats:
            if a.shape != (self.n, self.n):
                raise DimensionError(f"gadget matrices must be {self.n}x{self.n}")
            if not a.is_real or a != a.T:
                raise DomainError("gadget matrices must be real symmetric")
        object.__setattr__(self, "a_list", mats)

    @classmethod
    def of(cls, a_list: Sequence[Matrix]) -> "Gadget":
        mats = tuple(a_list)
        if not mats:
            raise DimensionError("need at least one matrix")
        return cls(len(mats) + 1, mats[0].rows, mats)

    def stack(self) -> np.ndarray:
        return np.array([a.to_numpy().real for a in self.a_list])


@dataclass(frozen=True)
class GadgetScan:
    lhs: float
    rhs: float
    argmax_y: tuple
    points: int

    def to_json(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "argmax_y": list(self.argmax_y), "points": self.points}


def build_gadget(a_list) -> Matrix:
    """The hermitian block matrix ``C``; accepts a :class:`Gadget` or a list of matrices."""
    g = a_list if isinstance(a_list, Gadget) else Gadget.of(a_list)
    zero = Matrix.zeros(g.n)
    blocks = [[zero] * g.m for _ in range(g.m)]
    for j, a in enumerate(g.a_list, start=1):
        blocks[0][j] = a
        blocks[j][0] = a
    return Matrix.from_blocks(blocks)


def gadget_matrix(g: Gadget, y):
    """``A(y)``: exact :class:`Matrix` for an exact ``y``, numpy array otherwise."""
    if isinstance(y, Matrix) or all(not isinstance(v, float) for v in y):
        yc = y if isinstance(y, Matrix) else Matrix.column(list(y))
        a = [(yc.T @ ai @ yc)[0, 0] for ai in g.a_list]
        rows = [[0] * g.m for _ in range(g.m)]
        for j, v in enumerate(a, start=1):
            rows[0][j] = v
            rows[j][0] = v
        return Matrix(rows)
    yv = np.asarray(y, dtype=float)
    a = np.einsum("i,kij,j->k", yv, g.stack(), yv)
    out = np.zeros((g.m, g.m))
    out[0, 1:] = a
    out[1:, 0] = a
    return out


def sphere_grid(n: int, points: int) -> np.ndarray:
    """Unit vectors: a uniform circle for ``n = 2``, a Fibonacci sphere for ``n = 3``."""
    if n == 2:
        th = 2 * math.pi * np.arange(points) / points
        return np.stack([np.cos(th), np.sin(th)], axis=1)
    if n == 3:
        k = np.arange(points) + 0.5
        z = 1 - 2 * k / points
        r = np.sqrt(1 - z * z)
        phi = math.pi * (3 - math.sqrt(5)) * k
        return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    raise ResourceLimitError(f"grid search supports N in {{2, 3}}, got {n}")


def _values(g: Gadget, ys: np.ndarray) -> tuple:
    a = np.einsum("pi,kij,pj->pk", ys, g.stack(), ys)
    rhs = (a * a).sum(axis=1)
    mats = np.zeros((len(ys), g.m, g.m))
    mats[:, 0, 1:] = a
    mats[:, 1:, 0] = a
    lhs = np.linalg.eigvalsh(mats)[:, -1]
    return lhs, rhs


def pointwise_gap(g: Gadget, ys) -> float:
    """Largest ``|lambda_max(A(y)) - sqrt(sum a_i^2)|`` over the given points."""
    lhs, rhs = _values(g, np.asarray(ys, dtype=float))
    return float(np.max(np.abs(lhs - np.sqrt(rhs))))


def scan(g: Gadget, grid: int = 10000, refine: bool = True, tol: float = 1e-6, max_points: int = 1 << 22) -> GadgetScan:
    """Grid maxima of ``lambda_max(A(y))`` and of ``sum_i (y^T A_i y)^2``.

    With ``refine`` the grid doubles until both maxima move by less than
    ``tol`` (or ``max_points`` is reached).
    """
    if grid < 1:
        raise ValueError("grid must be positive")
    prev = None
    pts = grid
    while True:
        ys = sphere_grid(g.n, pts)
        lhs, rhs = _values(g, ys)
        i = int(np.argmax(lhs))
        cur = (float(lhs[i]), float(rhs.max()), tuple(float(v) for v in ys[i]))
        if not refine or pts * 2 > max_points:
            break
        if prev is not None and abs(cur[0] - prev[0]) < tol and abs(cur[1] - prev[1]) < tol:
            break
        prev = cur
        pts *= 2
    return GadgetScan(cur[0], cur[1], cur[2], pts)


def gadget_value_lhs(g: Gadget, grid: int = 10000, refine: bool = True) -> float:
    """Grid maximum of ``lambda_max(A(y))`` over unit ``y``."""
    return scan(g, grid, refine).lhs


def gadget_value_rhs(g: Gadget, grid: int = 10000, refine: bool = True) -> float:
    """Grid maximum of ``sum_i (y^T A_i y)^2`` over unit ``y``."""
    return scan(g, grid, refine).rhs
