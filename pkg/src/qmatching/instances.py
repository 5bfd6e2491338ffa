"""Instance files: JSON encoding, validation and example generators.

An instance is a JSON object ``{"kind": ..., "n": N, ..., "meta": {...}}``:

* ``kraus``:    ``"kraus": [{"weight": "p/q", "matrix": M}, ...]``
* ``pairs``:    ``"pairs": [{"x": [e, ...], "y": [e, ...]}, ...]``
* ``choi``:     ``"matrix": M`` of size ``N^2 x N^2``
* ``subspace``: ``"basis": [M, ...]``
* ``matrix``:   ``"matrix": M`` (a single square matrix)
* ``tuple``:    ``"matrices": [M, ...]`` (exactly ``N`` matrices)

Matrices use the ``{"rows", "cols", "entries"}`` encoding of
:mod:`qmatching.exactmat`; entries may also be plain integers or ``"p/q"``
strings.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .errors import QMatchingError
from .exactmat import CQ, Matrix, cq_from_json, cq_to_json, matrix_from_json, matrix_to_json
from .qstate import (
    Budm,
    CpOperator,
    PairFamily,
    choi,
    cp_from_subspace_basis,
    operator_from_choi,
    separable_from_pairs,
    sk3,
)

__all__ = [
    "KINDS",
    "EXAMPLES",
    "InstanceError",
    "Instance",
    "parse_instance",
    "load_instance",
    "loads_instance",
    "instance_to_json",
    "dumps_instance",
    "generate_example",
]

KINDS = ("kraus", "pairs", "choi", "subspace", "matrix", "tuple")
EXAMPLES = ("sk3", "identity", "pure", "permutation-pattern", "random-separable", "ir-subspace")


class InstanceError(QMatchingError, ValueError):
    """Malformed instance data; the message names the offending field."""


@dataclass(frozen=True)
class Instance:
    kind: str
    n: int
    payload: Any
    meta: dict = field(default_factory=dict, compare=False)

    def operator(self) -> CpOperator:
        if self.kind == "kraus":
            return self.payload
        if self.kind == "pairs":
            return self.payload.operator()
        if self.kind == "choi":
            return operator_from_choi(self.payload)
        if self.kind == "subspace":
            return cp_from_subspace_basis(self.payload)
        raise InstanceError(f"kind {self.kind!r} does not describe an operator")

    def budm(self) -> Budm:
        if self.kind == "choi":
            return self.payload
        if self.kind == "pairs":
            return separable_from_pairs(self.payload)
        return choi(self.operator())

    def pairs(self) -> PairFamily:
        if self.kind != "pairs":
            raise InstanceError(f"expected a pairs instance, got {self.kind!r}")
        return self.payload


# ---------------------------------------------------------------------------
# parsing


def _field(obj: dict, key: str, where: str):
    if not isinstance(obj, dict):
        raise InstanceError(f"{where}: expected an object")
    if key not in obj:
        raise InstanceError(f"{where}: missing field {key!r}")
    return obj[key]


def _matrix(obj, where: str, shape=None) -> Matrix:
    try:
        m = matrix_from_json(obj)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise InstanceError(f"{where}: {exc}") from None
    if shape is not None and m.shape != shape:
        raise InstanceError(f"{where}: expected shape {shape[0]}x{shape[1]}, got {m.rows}x{m.cols}")
    return m


def _vector(obj, where: str, n: int) -> Matrix:
    if not isinstance(obj, list):
        raise InstanceError(f"{where}: expected a list of {n} entries")
    if len(obj) != n:
        raise InstanceError(f"{where}: expected {n} entries, got {len(obj)}")
    out = []
    for i, e in enumerate(obj):
        try:
            out.append(cq_from_json(e))
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise InstanceError(f"{where}[{i}]: {exc}") from None
    return Matrix.column(out)


def parse_instance(obj) -> Instance:
    """Validate a decoded JSON object and build the in-memory instance."""
    kind = _field(obj, "kind", "instance")
    if kind not in KINDS:
        raise InstanceError(f"kind: unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
    n = _field(obj, "n", "instance")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise InstanceError(f"n: expected a positive integer, got {n!r}")
    meta = obj.get("meta", {})
    if not isinstance(meta, dict):
        raise InstanceError("meta: expected an object")
    try:
        payload = _parse_payload(kind, n, obj)
    except InstanceError:
        raise
    except (ValueError, TypeError) as exc:
        raise InstanceError(f"{kind}: {exc}") from None
    return Instance(kind, n, payload, dict(meta))


def _parse_payload(kind: str, n: int, obj: dict):
    if kind == "kraus":
        terms = _field(obj, "kraus", "instance")
        if not isinstance(terms, list) or not terms:
            raise InstanceError("kraus: expected a nonempty list")
        out = []
        for i, term in enumerate(terms):
            where = f"kraus[{i}]"
            w = _field(term, "weight", where)
            try:
                wf = Fraction(w) if not isinstance(w, bool) else None
            except (ValueError, TypeError, ZeroDivisionError):
                wf = None
            if wf is None or wf <= 0:
                raise InstanceError(f"{where}.weight: expected a positive rational, got {w!r}")
            out.append((wf, _matrix(_field(term, "matrix", where), f"{where}.matrix", (n, n))))
        return CpOperator(n, tuple(out))
    if kind == "pairs":
        items = _field(obj, "pairs", "instance")
        if not isinstance(items, list):
            raise InstanceError("pairs: expected a list")
        pairs = []
        for i, item in enumerate(items):
            where = f"pairs[{i}]"
            x = _vector(_field(item, "x", where), f"{where}.x", n)
            y = _vector(_field(item, "y", where), f"{where}.y", n)
            if x.is_zero() or y.is_zero():
                raise InstanceError(f"{where}: vectors must be nonzero")
            if (x, y) in pairs:
                raise InstanceError(f"{where}: duplicate pair")
            pairs.append((x, y))
        return PairFamily(n, tuple(pairs))
    if kind == "choi":
        m = _matrix(_field(obj, "matrix", "instance"), "matrix", (n * n, n * n))
        if not m.is_hermitian():
            raise InstanceError("matrix: Choi matrix must be hermitian")
        return Budm(n, m)
    if kind == "subspace":
        basis = _field(obj, "basis", "instance")
        if not isinstance(basis, list) or not basis:
            raise InstanceError("basis: expected a nonempty list")
        mats = [_matrix(b, f"basis[{i}]", (n, n)) for i, b in enumerate(basis)]
        for i, b in enumerate(mats):
            if b.is_zero():
                raise InstanceError(f"basis[{i}]: basis matrices must be nonzero")
        return tuple(mats)
    if kind == "matrix":
        return _matrix(_field(obj, "matrix", "instance"), "matrix", (n, n))
    mats = _field(obj, "matrices", "instance")
    if not isinstance(mats, list) or len(mats) != n:
        raise InstanceError(f"matrices: expected a list of exactly {n} matrices")
    return tuple(_matrix(m, f"matrices[{i}]", (n, n)) for i, m in enumerate(mats))


def loads_instance(text: str) -> Instance:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_instance(obj)


def load_instance(path: str) -> Instance:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InstanceError(f"{path}: {exc.strerror}") from None
    try:
        return loads_instance(text)
    except InstanceError as exc:
        raise InstanceError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# encoding


def _vec_json(v: Matrix) -> list:
    return [cq_to_json(e) for e in v.entries()]


def instance_to_json(inst: Instance) -> dict:
    out = {"kind": inst.kind, "n": inst.n}
    p = inst.payload
    if inst.kind == "kraus":
        out["kraus"] = [{"weight": str(w), "matrix": matrix_to_json(b)} for w, b in p.kraus]
    elif inst.kind == "pairs":
        out["pairs"] = [{"x": _vec_json(x), "y": _vec_json(y)} for x, y in p.pairs]
    elif inst.kind == "choi":
        out["matrix"] = matrix_to_json(p.matrix)
    elif inst.kind == "subspace":
        out["basis"] = [matrix_to_json(b) for b in p]
    elif inst.kind == "matrix":
        out["matrix"] = matrix_to_json(p)
    else:
        out["matrices"] = [matrix_to_json(m) for m in p]
    if inst.meta:
        out["meta"] = dict(inst.meta)
    return out


def dumps_instance(inst: Instance) -> str:
    return json.dumps(instance_to_json(inst), indent=1) + "\n"


# ---------------------------------------------------------------------------
# generators


def _rand_entry(rng: random.Random, lo=-3, hi=3):
    return rng.randint(lo, hi)


def generate_example(name: str, n: int | None = None, k: int | None = None, seed: int = 0) -> Instance:
    """Build a named example instance; random ones are reproducible from ``seed``.

    * ``sk3``: the 3x3 skew-symmetric doubly stochastic map;
    * ``identity``: ``X -> X`` on ``n x n`` matrices;
    * ``pure``: Choi matrix ``r r^H`` with ``r`` the row-major flattening of a
      random integer matrix ``R``;
    * ``permutation-pattern``: blocks ``A_ij = R[i, j] e_i e_j^T`` with
      ``R = B B^T`` for a random integer ``B``;
    * ``random-separable``: ``k`` distinct pairs of nonzero integer vectors
      with entries in ``[-3, 3]``;
    * ``ir-subspace``: the span of ``I`` and ``[[0, -2], [0, 1]]``.
    """
    rng = random.Random(seed)
    meta = {"generator": name, "seed": str(seed)}
    if name == "sk3":
        return Instance("kraus", 3, sk3(), meta)
    if name == "identity":
        n = n or 2
        return Instance("kraus", n, CpOperator(n, ((1, Matrix.identity(n)),)), meta)
    if name == "pure":
        n = n or 2
        r = Matrix.column([_rand_entry(rng) for _ in range(n * n)])
        return Instance("choi", n, Budm(n, r @ r.H), meta)
    if name == "permutation-pattern":
        n = n or 3
        b = Matrix([[_rand_entry(rng) for _ in range(n)] for _ in range(n)])
        r = b @ b.T
        rows = [[0] * (n * n) for _ in range(n * n)]
        for i in range(n):
            for j in range(n):
                rows[i * n + i][j * n + j] = r[i, j]
        return Instance("choi", n, Budm(n, Matrix(rows)), meta)
    if name == "random-separable":
        n = n or 2
        k = 4 if k is None else k
        pairs = []
        attempts = 0
        while len(pairs) < k:
            attempts += 1
            if attempts > 10000:
                raise InstanceError(f"could not draw {k} distinct pairs in dimension {n}")
            x = [_rand_entry(rng) for _ in range(n)]
            y = [_rand_entry(rng) for _ in range(n)]
            if any(x) and any(y) and (x, y) not in pairs:
                pairs.append((x, y))
        return Instance("pairs", n, PairFamily(n, tuple(pairs)), meta)
    if name == "ir-subspace":
        return Instance("subspace", 2, (Matrix.identity(2), Matrix([[0, -2], [0, 1]])), meta)
    raise InstanceError(f"unknown example {name!r}; expected one of {', '.join(EXAMPLES)}")


def format_cq(x: CQ) -> dict:
    """``{"exact": "p/q (+ r/s i)", "float": ...}`` with a pair for complex values."""
    x = x if isinstance(x, CQ) else CQ(x)
    if x.is_real:
        return {"exact": str(x), "float": _float(x.re)}
    return {"exact": str(x), "float": [_float(x.re), _float(x.im)]}


def _float(f: Fraction) -> float:
    try:
        return float(f)
    except OverflowError:
        return float("inf") if f > 0 else float("-inf")
