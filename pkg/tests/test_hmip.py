import itertools
import random
from fractions import Fraction

import pytest

from helpers import rand_pairs, unit
from qmatching.errors import DegenerateInputError, RankDeficiencyError
from qmatching.exactmat import Matrix, det_exact
from qmatching.hmip import (
    MATCHING,
    NOT_MATCHING,
    HmipInstance,
    decide_matching,
    first_step_normalization,
    iteration_bound,
)
from qmatching.matroid import lin_rank_randomized, mi_rank_bruteforce
from qmatching.permanents import quantum_permanent
from qmatching.qstate import CpOperator, PairFamily, choi, sk3

E2 = [unit(2, 0), unit(2, 1)]


def graph_pairs(n, edges):
    return PairFamily.from_lists([(unit(n, i), unit(n, j)) for i, j in edges])


def has_perfect_matching(n, edges):
    es = set(edges)
    return any(all((i, perm[i]) in es for i in range(n)) for perm in itertools.permutations(range(n)))


class TestBound:
    def test_examples(self):
        assert iteration_bound(2, 1) == 18
        assert iteration_bound(2, 1, separable=True) == 10
        assert iteration_bound(1, 7) == 1

    def test_monotone(self):
        assert iteration_bound(3, 5) > iteration_bound(3, 4) >= iteration_bound(3, 4, separable=True)
        with pytest.raises(ValueError):
            iteration_bound(0, 1)


class TestInstance:
    def test_integerization(self):
        t = CpOperator(2, ((Fraction(1, 3), Matrix([[1, 2], [0, 1]])),))
        inst = HmipInstance.from_operator(t)
        assert inst.multiplier == 3
        assert inst.operator.choi_matrix.den == 1
        assert inst.q_max == 4

    def test_pairs_are_separable(self):
        inst = HmipInstance.from_pairs(graph_pairs(2, [(0, 0)]))
        assert inst.separable and inst.weakly_separable and inst.q_max == 1


class TestDecide:
    def test_matching_pairs(self):
        v = decide_matching(HmipInstance.from_pairs(graph_pairs(2, [(0, 0), (1, 1)])))
        assert v.decision == MATCHING and v.iterations_used == 0
        assert v.certificate == {"type": "ds_threshold", "step": 0}

    def test_non_matching_pairs(self):
        v = decide_matching(HmipInstance.from_pairs(PairFamily.from_lists([(E2[0], E2[0]), (E2[0], E2[1])])))
        assert v.decision == NOT_MATCHING
        assert v.certificate["type"] == "singular_normalizer"

    def test_ir_subspace(self):
        v = decide_matching(HmipInstance.from_subspace([Matrix.identity(2), Matrix([[0, -2], [0, 1]])]))
        assert v.matching
        assert v.interpretation == "the subspace contains a nonsingular matrix"

    def test_sk3(self):
        # integerization doubles the map, so one row step restores T(I) = I
        v = decide_matching(HmipInstance.from_operator(sk3()))
        assert v.matching and v.iterations_used == 1 and v.final_ds == 0

    def test_hard_non_matching_exhausts_bound(self):
        # every 2x2 minor of the x's or the y's vanishes on a large subset
        p = graph_pairs(3, [(0, 0), (1, 0), (2, 0), (0, 1), (0, 2)])
        assert mi_rank_bruteforce(p) == 2
        v = decide_matching(HmipInstance.from_pairs(p))
        assert v.decision == NOT_MATCHING
        assert v.certificate == {"type": "iteration_bound", "steps": v.bound_L}
        assert v.final_ds > Fraction(1, 3)

    def test_zero_instance(self):
        zero = CpOperator(2, ((1, Matrix.zeros(2)),))
        with pytest.raises(DegenerateInputError):
            decide_matching(HmipInstance.from_operator(zero))

    def test_deterministic(self):
        p = rand_pairs(random.Random(70), 3, 4)
        a = decide_matching(HmipInstance.from_pairs(p))
        b = decide_matching(HmipInstance.from_pairs(p))
        assert a == b and a.log == b.log

    @pytest.mark.parametrize("mode", ["exact", "float"])
    def test_oracle_agreement(self, mode):
        rng = random.Random(71)
        for _ in range(25):
            n = rng.randint(2, 3)
            p = rand_pairs(rng, n, rng.randint(1, 5))
            v = decide_matching(HmipInstance.from_pairs(p), mode=mode)
            assert v.matching == (mi_rank_bruteforce(p) == n)
            if v.matching:
                assert v.iterations_used <= v.bound_L and v.final_ds <= v.threshold

    def test_unrounded_agrees(self):
        rng = random.Random(72)
        for _ in range(10):
            p = rand_pairs(rng, 2, rng.randint(2, 4))
            a = decide_matching(HmipInstance.from_pairs(p), round_bits=None)
            b = decide_matching(HmipInstance.from_pairs(p))
            assert a.decision == b.decision

    def test_hall_embedding(self):
        rng = random.Random(73)
        for _ in range(25):
            n = rng.randint(1, 4)
            edges = [(i, j) for i in range(n) for j in range(n) if rng.random() < 0.5]
            if not edges:
                continue
            v = decide_matching(HmipInstance.from_pairs(graph_pairs(n, edges)))
            assert v.matching == has_perfect_matching(n, edges)

    def test_subspace_agrees_with_random_rank(self):
        rng = random.Random(74)
        for _ in range(8):
            basis = []
            for _ in range(rng.randint(1, 3)):
                x = [rng.randint(-2, 2) for _ in range(2)]
                y = [rng.randint(-2, 2) for _ in range(2)]
                if any(x) and any(y):
                    basis.append(Matrix.column(x) @ Matrix.column(y).H)
            if not basis:
                continue
            v = decide_matching(HmipInstance.from_subspace(basis))
            assert v.matching == (lin_rank_randomized(basis) == 2)

    def test_json(self):
        v = decide_matching(HmipInstance.from_pairs(graph_pairs(2, [(0, 0), (1, 1)])))
        out = v.to_json()
        assert out["decision"] == "MATCHING" and out["final_ds"]["exact"] == "0"


class TestFirstStep:
    def test_doubly_stochastic_unchanged(self):
        sc = first_step_normalization(sk3())
        assert sc.p == Matrix.identity(3) and sc.ds() == 0

    def test_diag_example(self):
        sc = first_step_normalization(CpOperator.from_matrices([Matrix.diag([1, 2])]))
        assert sc.p == Matrix.diag([1, Fraction(1, 4)])
        assert sc.unit_image_similar() == Matrix.identity(2)

    def test_permanent_divided_by_marginal_det(self):
        p = rand_pairs(random.Random(75), 2, 3)
        inst = HmipInstance.from_pairs(p)
        sc = first_step_normalization(inst)
        base = quantum_permanent(choi(inst.operator))
        assert sc.qp() == base * det_exact(sc.p)

    def test_singular(self):
        p = PairFamily.from_lists([(E2[0], E2[0]), (E2[0], E2[1])])
        with pytest.raises(RankDeficiencyError) as info:
            first_step_normalization(HmipInstance.from_pairs(p))
        assert info.value.rank == 1
