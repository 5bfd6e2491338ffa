"""Acceptance criteria 1-14.

Each test records one PASS/FAIL line in ``REPORT``; the pytest terminal
summary prints them.  Run ``python3 tests/test_acceptance.py`` to get the
same lines without pytest.
"""

from __future__ import annotations

import functools
import itertools
import math
import os
import random
import sys
import time
from fractions import Fraction

import numpy as np

sys.path.insert(0, os.path.dirname(__file__))

from helpers import rand_budm, rand_matrix, rand_pairs, rand_psd, unit  # noqa: E402
from qmatching.exactmat import Matrix, det_exact  # noqa: E402
from qmatching.hardness import Gadget, pointwise_gap, sphere_grid  # noqa: E402
from qmatching.hmip import HmipInstance, decide_matching, iteration_bound  # noqa: E402
from qmatching.matroid import mi_rank_bruteforce  # noqa: E402
from qmatching.permanents import (  # noqa: E402
    MatrixTuple,
    barvinok_estimate,
    matroidal_permanent,
    qp_upper_bound,
    quantum_permanent,
)
from qmatching.qstate import Budm, PairFamily, apply, choi, separable_from_pairs, sk3  # noqa: E402
from qmatching.scaling import cap_tuple, local_scale, osi_run  # noqa: E402

REPORT: dict = {}


def _record(num: int, title: str, ok: bool, detail: str) -> bool:
    REPORT[num] = f"[{'PASS' if ok else 'FAIL'}] {num:2d}. {title}: {detail}"
    return ok


def _invertible(rng, n, complex_=True):
    while True:
        m = rand_matrix(rng, n, complex_=complex_)
        if det_exact(m) != 0:
            return m


def _pure(r: Matrix) -> Budm:
    n = r.rows
    flat = Matrix.column([r[i, j] for i in range(n) for j in range(n)])
    return Budm(n, flat @ flat.H)


def _graph_pairs(n, edges):
    return PairFamily.from_lists([(unit(n, i), unit(n, j)) for i, j in edges])


# ---------------------------------------------------------------------------
# shared runs (criteria 6 and 8 feed criterion 7)


@functools.lru_cache(maxsize=None)
def _oracle_runs(count: int = 220, seed: int = 1000):
    rng = random.Random(seed)
    rows = []
    for _ in range(count):
        n = rng.randint(2, 3)
        p = rand_pairs(rng, n, rng.randint(1, 6))
        inst = HmipInstance.from_pairs(p)
        rows.append((inst, decide_matching(inst), mi_rank_bruteforce(p) == n))
    return tuple(rows)


@functools.lru_cache(maxsize=None)
def _hall_runs(count: int = 120, seed: int = 2000):
    rng = random.Random(seed)
    rows = []
    while len(rows) < count:
        n = rng.randint(1, 5)
        density = rng.choice([0.3, 0.5, 0.7])
        edges = [(i, j) for i in range(n) for j in range(n) if rng.random() < density]
        if not edges:
            continue
        inst = HmipInstance.from_pairs(_graph_pairs(n, edges))
        es = set(edges)
        truth = any(all((i, s[i]) in es for i in range(n)) for s in itertools.permutations(range(n)))
        rows.append((inst, decide_matching(inst), truth))
    return tuple(rows)


# ---------------------------------------------------------------------------


def check_01():
    start = time.perf_counter()
    val = quantum_permanent(choi(sk3()), formula=9)
    took = time.perf_counter() - start
    ok = val == 0 and took < 5
    return _record(1, "QP of the Sk3 Choi matrix is exactly 0", ok, f"value {val}, {took:.3f} s (limit 5 s)")


def check_02():
    rng = random.Random(2)
    start = time.perf_counter()
    count = agree = 0
    for n in (2, 3):
        for _ in range(12):
            rho = rand_budm(rng, n, complex_=True, den=2, rank=rng.randint(1, n * n))
            vals = [quantum_permanent(rho, f) for f in (9, 10, 11)]
            count += 1
            agree += vals[0] == vals[1] == vals[2]
    took = time.perf_counter() - start
    ok = agree == count and count >= 20 and took < 60
    return _record(2, "the three QP routes agree exactly", ok, f"{agree}/{count} instances, {took:.1f} s (limit 60 s)")


def check_03():
    rng = random.Random(3)
    count = agree = 0
    for n in (2, 3):
        for _ in range(12):
            p = rand_pairs(rng, n, rng.randint(1, 5), complex_=rng.random() < 0.5)
            count += 1
            agree += quantum_permanent(separable_from_pairs(p)) == matroidal_permanent(p)
    return _record(3, "QP of a separable state equals the matroidal permanent", agree == count, f"{agree}/{count} pair families")


def check_04():
    rng = random.Random(4)
    count = agree = 0
    for n in (2, 3, 4):
        for _ in range(4):
            r = rand_matrix(rng, n, complex_=True, den=3)
            count += 1
            agree += quantum_permanent(_pure(r)) == det_exact(r).abs2() * math.factorial(n)
    return _record(4, "pure states give N! |det R|^2", agree == count, f"{agree}/{count} matrices R, N in 2..4")


def check_05():
    rng = random.Random(5)
    count = agree = 0
    for n in (2, 3):
        for _ in range(6):
            rho = rand_budm(rng, n, complex_=True)
            a1, a2 = _invertible(rng, n), rand_matrix(rng, n, complex_=True)
            k = a1.kron(a2)
            lhs = quantum_permanent(Budm(n, k @ rho.matrix @ k.H))
            rhs = det_exact(a1).abs2() * det_exact(a2).abs2() * quantum_permanent(rho)
            count += 1
            agree += lhs == rhs
    return _record(5, "QP scales by |det A1|^2 |det A2|^2 under congruence", agree == count, f"{agree}/{count} instances")


def check_06():
    start = time.perf_counter()
    rows = _oracle_runs()
    took = time.perf_counter() - start
    agree = sum(v.matching == truth for _, v, truth in rows)
    matching = sum(truth for _, _, truth in rows)
    ok = agree == len(rows) and len(rows) >= 200 and took < 300
    return _record(
        6,
        "decide_matching agrees with the brute-force matroid oracle",
        ok,
        f"{agree}/{len(rows)} agree ({matching} matching), {took:.1f} s (limit 300 s)",
    )


def check_07():
    runs = [(inst, v) for inst, v, _ in _oracle_runs() + _hall_runs() if v.matching]
    worst = 0.0
    ok = bool(runs)
    for inst, v in runs:
        bound = iteration_bound(inst.n, inst.q_max, inst.separable)
        ok &= v.iterations_used <= bound
        worst = max(worst, v.iterations_used / bound)
    return _record(7, "MATCHING runs stay within the iteration bound", ok, f"{len(runs)} runs, max iterations/bound {worst:.3f}")


def check_08():
    rows = _hall_runs()
    agree = sum(v.matching == truth for _, v, truth in rows)
    ok = agree == len(rows) and len(rows) >= 100
    return _record(8, "bipartite graphs: verdict equals perfect-matching existence", ok, f"{agree}/{len(rows)} graphs, N <= 5")


def check_09():
    rng = random.Random(9)
    chain = chain_ok = 0
    for n in (2, 3):
        for _ in range(8):
            rho = rand_budm(rng, n, complex_=True, rank=rng.randint(1, n * n))
            md_bound, det_bound = qp_upper_bound(rho)
            chain += 1
            chain_ok += quantum_permanent(rho).re <= md_bound.re <= det_bound.re
    det_checks = det_ok = 0
    for n in (2, 3):
        for _ in range(6):
            p = rand_pairs(rng, n, rng.randint(1, 5), complex_=rng.random() < 0.5)
            qp = quantum_permanent(separable_from_pairs(p)).re
            t = p.operator()
            for _ in range(5):
                x = rand_psd(rng, n, complex_=True) + Matrix.identity(n).scale(Fraction(1, 10))
                det_checks += 1
                det_ok += det_exact(apply(t, x)).re >= qp * det_exact(x).re
    ok = chain_ok == chain and det_ok == det_checks
    return _record(
        9,
        "upper-bound chain and the separable determinant inequality",
        ok,
        f"chain {chain_ok}/{chain} states, det inequality {det_ok}/{det_checks} (instance, X) pairs",
    )


def check_10():
    families = [
        [([1, 0], [1, 0]), ([0, 1], [0, 1]), ([1, 1], [1, -1])],
        [([1, 2], [2, 1]), ([1, -1], [1, 1]), ([0, 1], [1, 0]), ([3, 1], [1, 1])],
        [([1, 1], [1, 0]), ([1, -1], [0, 1])],
        [([2, 1], [1, 3]), ([1, 3], [2, -1]), ([1, 0], [1, 1])],
        [([1, 0], [1, 2]), ([1, 1], [1, 1]), ([0, 2], [3, 1]), ([1, -2], [1, 0]), ([2, 1], [0, 1])],
    ]
    ok = True
    parts = []
    for i, fam in enumerate(families):
        p = PairFamily.from_lists(fam)
        exact = float(matroidal_permanent(p))
        mean, err = barvinok_estimate(p, 10_000, seed=i)
        z = abs(mean - exact) / err if err else (0.0 if mean == exact else math.inf)
        ok &= z <= 5
        parts.append(f"{z:.2f}")
    return _record(10, "phase estimator within 5 stderr of the exact MP", ok, f"|z| = {', '.join(parts)} (10^4 samples each)")


def check_11():
    s, _ = osi_run(sk3(), 50, -1.0, mode="float")
    fixed = all(float(r.ds) == 0.0 for r in s.log)
    rng = random.Random(11)
    t = local_scale(sk3(), _invertible(rng, 3), _invertible(rng, 3))
    s2, reached = osi_run(t, 200, 1e-8, mode="float")
    converged = reached and s2.ds < 1e-8
    stalls = PairFamily.from_lists([([1, 0], [1, 0]), ([1, 0], [0, 1])]).operator()
    steps = 10 * iteration_bound(2, 1)
    threshold = 1 / 5
    s3, hit = osi_run(stalls, steps, threshold, mode="float", pseudo_inverse=True)
    low = min(float(r.ds) for r in s3.log)
    stays = not hit and low > threshold and s3.iter == steps
    ok = fixed and converged and stays
    return _record(
        11,
        "float scaling: Sk3 fixed, scaled Sk3 converges, non-matching family stalls",
        ok,
        f"Sk3 max ds {max(float(r.ds) for r in s.log):.1e}; scaled Sk3 ds {s2.ds:.1e} at step {s2.iter}; "
        f"non-matching min ds {low:.3f} > 1/5 over {s3.iter} steps",
    )


def check_12():
    rng = random.Random(12)
    count = good = 0
    worst = 0.0
    for n in (2, 3):
        for _ in range(12):
            t = MatrixTuple.of([rand_psd(rng, n, complex_=True) for _ in range(n)])
            upper, lower = cap_tuple(t)
            ceiling = n**n / math.factorial(n) * lower
            count += 1
            slack = max(lower - upper, upper - ceiling, 0.0)
            worst = max(worst, slack)
            good += slack <= 1e-6
    return _record(12, "capacity lies between M and (N^N/N!) M", good == count, f"{good}/{count} tuples, worst violation {worst:.1e}")


def _scaled_mp(p: PairFamily, pm: np.ndarray, qm: np.ndarray) -> float:
    # Kraus L x y^H R^H = (L x)(R y)^H with P = L^H L, Q = R^H R
    lmat = np.linalg.cholesky(pm).conj().T
    rmat = np.linalg.cholesky(qm).conj().T
    xs = [lmat @ x.to_numpy().ravel() for x in p.xs]
    ys = [rmat @ y.to_numpy().ravel() for y in p.ys]
    total = 0.0
    for sub in itertools.combinations(range(p.k), p.n):
        dx = np.linalg.det(np.array([xs[i] for i in sub]).T)
        dy = np.linalg.det(np.array([ys[i] for i in sub]).T)
        total += abs(dx) ** 2 * abs(dy) ** 2
    return total


def check_13():
    rng = random.Random(13)
    values = []
    cross = 0.0
    tried = 0
    while len(values) < 60 and tried < 1000:
        tried += 1
        p = rand_pairs(rng, 2, rng.randint(2, 5), complex_=rng.random() < 0.5)
        mp = matroidal_permanent(p)
        if mp == 0:
            continue
        s, reached = osi_run(p.operator(), 5000, 1e-6, mode="float")
        if not reached:
            continue
        pm, qm = s.p_numpy(), s.q_numpy()
        qp = float(mp) * float(np.real(np.linalg.det(pm))) * float(np.real(np.linalg.det(qm)))
        cross = max(cross, abs(qp - _scaled_mp(p, pm, qm)))
        values.append(qp)
    floor = 0.5 - 1e-3
    ok = len(values) >= 50 and min(values) >= floor
    return _record(
        13,
        "scaled separable N=2 instances have QP >= 1/2",
        ok,
        f"{len(values)} instances, min QP {min(values):.6f} (floor {floor}), route mismatch {cross:.1e}",
    )


def check_14():
    rng = random.Random(14)
    ys = sphere_grid(2, 10_000)
    worst = 0.0
    for i in range(5):
        m = 2 + i % 2
        mats = []
        for _ in range(m - 1):
            a, b, c = (rng.randint(-3, 3) for _ in range(3))
            mats.append(Matrix([[a, b], [b, c]]))
        worst = max(worst, pointwise_gap(Gadget.of(mats), ys))
    return _record(14, "largest eigenvalue of A(y) equals sqrt(sum (y^T A_i y)^2)", worst <= 1e-9, f"5 gadgets x 10^4 points, max gap {worst:.1e}")


CHECKS = [globals()[f"check_{i:02d}"] for i in range(1, 15)]


def test_criterion_01_sk3_permanent():
    assert check_01(), REPORT[1]


def test_criterion_02_route_equivalence():
    assert check_02(), REPORT[2]


def test_criterion_03_separable_bridge():
    assert check_03(), REPORT[3]


def test_criterion_04_pure_state_law():
    assert check_04(), REPORT[4]


def test_criterion_05_congruence_scaling():
    assert check_05(), REPORT[5]


def test_criterion_06_oracle_agreement():
    assert check_06(), REPORT[6]


def test_criterion_07_iteration_bound():
    assert check_07(), REPORT[7]


def test_criterion_08_hall_embedding():
    assert check_08(), REPORT[8]


def test_criterion_09_bounds():
    assert check_09(), REPORT[9]


def test_criterion_10_estimator():
    assert check_10(), REPORT[10]


def test_criterion_11_convergence():
    assert check_11(), REPORT[11]


def test_criterion_12_capacity_brackets():
    assert check_12(), REPORT[12]


def test_criterion_13_scaled_separable_floor():
    assert check_13(), REPORT[13]


def test_criterion_14_gadget_identity():
    assert check_14(), REPORT[14]


if __name__ == "__main__":
    failed = 0
    for check in CHECKS:
        try:
            ok = check()
        except Exception as exc:  # report and keep going
            num = int(check.__name__[-2:])
            REPORT[num] = f"[FAIL] {num:2d}. raised {type(exc).__name__}: {exc}"
            ok = False
        print(REPORT[int(check.__name__[-2:])], flush=True)
        failed += not ok
    sys.exit(1 if failed else 0)
