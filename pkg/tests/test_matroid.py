import random

import pytest

from helpers import rand_pairs, unit
from qmatching.errors import ResourceLimitError
from qmatching.exactmat import Matrix
from qmatching.matroid import edmonds_rado_check, lin_rank_randomized, mi_rank_bruteforce
from qmatching.qstate import PairFamily


def pairs(n, edges):
    return PairFamily.from_lists([(unit(n, i), unit(n, j)) for i, j in edges])


class TestBruteforce:
    def test_examples(self):
        assert mi_rank_bruteforce(pairs(2, [(0, 0), (1, 1)])) == 2
        assert mi_rank_bruteforce(pairs(2, [(0, 0), (0, 1)])) == 1
        assert mi_rank_bruteforce(pairs(3, [(0, 0), (1, 0), (2, 0), (0, 1), (0, 2)])) == 2

    def test_cap(self):
        p = rand_pairs(random.Random(80), 2, 13)
        with pytest.raises(ResourceLimitError):
            mi_rank_bruteforce(p)
        assert mi_rank_bruteforce(p, cap=13) == 2


class TestEdmondsRado:
    def test_examples(self):
        assert edmonds_rado_check(pairs(2, [(0, 0), (1, 1)])) == (True, None)
        ok, witness = edmonds_rado_check(pairs(2, [(0, 0), (0, 1)]))
        assert not ok and witness == (0, 1)

    def test_min_max_agreement(self):
        rng = random.Random(81)
        for _ in range(40):
            n = rng.randint(2, 3)
            p = rand_pairs(rng, n, rng.randint(1, 5), lo=-1, hi=1)
            ok, _ = edmonds_rado_check(p)
            assert ok == (mi_rank_bruteforce(p) == n)


class TestRandomized:
    def test_examples(self):
        assert lin_rank_randomized([Matrix.identity(2), Matrix([[0, -2], [0, 1]])]) == 2
        assert lin_rank_randomized([Matrix.diag([1, 0]), Matrix([[0, 1], [0, 0]])]) == 1
        assert lin_rank_randomized([]) == 0

    def test_seeded(self):
        basis = [Matrix([[1, 2], [2, 4]]), Matrix([[0, 1], [1, 0]])]
        assert lin_rank_randomized(basis, seed=5) == lin_rank_randomized(basis, seed=5)
        with pytest.raises(ValueError):
            lin_rank_randomized(basis, trials=0)

    def test_pair_images_match_matroid_rank(self):
        rng = random.Random(82)
        for _ in range(20):
            n = rng.randint(2, 3)
            p = rand_pairs(rng, n, rng.randint(1, 5))
            basis = [x @ y.H for x, y in p.pairs]
            assert (lin_rank_randomized(basis) == n) == (mi_rank_bruteforce(p) == n)
