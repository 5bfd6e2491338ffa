import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import matrices, rand_matrix
from qmatching.errors import DimensionError, ShapeError, SingularMatrixError
from qmatching.exactmat import (
    CQ,
    Matrix,
    charpoly,
    cq_from_json,
    cq_to_json,
    det_exact,
    inverse_exact,
    ldl_terms,
    matrix_from_json,
    matrix_to_json,
    psd_check,
    rank_exact,
)


class TestScalar:
    def test_arithmetic(self):
        a = CQ(Fraction(1, 2), 1)
        b = CQ(2, Fraction(-1, 3))
        assert a + b == CQ(Fraction(5, 2), Fraction(2, 3))
        assert a * b == CQ(Fraction(1, 1) + Fraction(1, 3), Fraction(-1, 6) + 2)
        assert (a / b) * b == a
        assert a.conj() == CQ(Fraction(1, 2), -1)
        assert a.abs2() == Fraction(5, 4)

    @pytest.mark.parametrize("text", ["3", "-2/7", "1/2 + 3/4 i", "5 i", "-1/3 - 2 i"])
    def test_parse_roundtrip(self, text):
        x = CQ.parse(text)
        assert CQ.parse(str(x)) == x

    def test_json_roundtrip(self):
        x = CQ(Fraction(-7, 3), Fraction(2, 9))
        assert cq_from_json(cq_to_json(x)) == x
        assert cq_to_json(x) == [["-7", "3"], ["2", "9"]]
        assert cq_from_json("3/4") == CQ(Fraction(3, 4))
        assert cq_from_json(5) == CQ(5)

    def test_normalized_denominators(self):
        x = CQ(Fraction(4, -6))
        assert x.re.denominator == 3 and x.re.numerator == -2


class TestDet:
    def test_examples(self):
        assert det_exact(Matrix.identity(3)) == 1
        assert det_exact(Matrix([[0, -2], [0, 1]])) == 0
        assert det_exact(Matrix.diag([2, 3])) == 6

    def test_non_square(self):
        with pytest.raises(DimensionError):
            det_exact(Matrix([[1, 2, 3], [4, 5, 6]]))

    @given(st.integers(2, 4).flatmap(lambda n: st.tuples(matrices(n=n), matrices(n=n))))
    def test_multiplicative(self, ab):
        a, b = ab
        assert det_exact(a @ b) == det_exact(a) * det_exact(b)

    def test_against_numpy(self):
        rng = random.Random(1)
        for _ in range(30):
            m = rand_matrix(rng, rng.randint(1, 5), complex_=True, den=3)
            assert complex(det_exact(m)) == pytest.approx(np.linalg.det(m.to_numpy()), rel=1e-9, abs=1e-9)


class TestRank:
    def test_examples(self):
        assert rank_exact(Matrix.zeros(3)) == 0
        assert rank_exact(Matrix([[0, -2], [0, 1]])) == 1
        assert rank_exact(Matrix.identity(4)) == 4

    def test_rectangular(self):
        assert rank_exact(Matrix([[1, 2, 3], [2, 4, 6]])) == 1
        assert rank_exact(Matrix([[1, 0], [0, 1], [1, 1]])) == 2

    @given(matrices(max_n=4))
    def test_rank_of_adjoint(self, m):
        assert rank_exact(m) == rank_exact(m.H)

    def test_low_rank_products(self):
        rng = random.Random(2)
        for _ in range(20):
            n = rng.randint(2, 5)
            r = rng.randint(1, n)
            m = rand_matrix(rng, n, r, complex_=True) @ rand_matrix(rng, r, n, complex_=True)
            assert rank_exact(m) == int(np.linalg.matrix_rank(m.to_numpy()))


class TestInverse:
    def test_examples(self):
        assert inverse_exact(Matrix.identity(2)) == Matrix.identity(2)
        assert inverse_exact(Matrix.diag([2, 4])) == Matrix.diag([Fraction(1, 2), Fraction(1, 4)])
        assert inverse_exact(Matrix([[1, 1], [0, 1]])) == Matrix([[1, -1], [0, 1]])

    def test_singular_raises_with_det(self):
        with pytest.raises(SingularMatrixError) as info:
            inverse_exact(Matrix([[0, -2], [0, 1]]))
        assert info.value.det == 0

    @given(matrices(max_n=4))
    def test_inverse_identity(self, m):
        if det_exact(m) == 0:
            return
        inv = inverse_exact(m)
        assert inv @ m == Matrix.identity(m.rows)
        assert m @ inv == Matrix.identity(m.rows)


class TestPsd:
    def test_examples(self):
        assert psd_check(Matrix.identity(3))
        assert not psd_check(Matrix.diag([1, -1]))
        assert psd_check(Matrix([[2, 1], [1, 2]]))

    def test_non_hermitian(self):
        with pytest.raises(ShapeError):
            psd_check(Matrix([[1, 2], [0, 1]]))

    def test_charpoly(self):
        assert charpoly(Matrix([[2, 1], [1, 2]])) == [CQ(3), CQ(-4), CQ(1)]

    def test_against_eigenvalues(self):
        rng = random.Random(3)
        for _ in range(60):
            n = rng.randint(1, 4)
            a = rand_matrix(rng, n, complex_=True)
            h = a + a.H
            if rng.random() < 0.5:
                h = a @ a.H
            expect = bool(np.all(np.linalg.eigvalsh(h.to_numpy()) >= -1e-9))
            assert psd_check(h) == expect

    def test_singular_psd(self):
        v = Matrix.column([1, 2, 3])
        assert psd_check(v @ v.H)
        assert not psd_check(v @ v.H - Matrix.identity(3).scale(Fraction(1, 100)))

    def test_ldl_terms_reassemble(self):
        rng = random.Random(4)
        for _ in range(20):
            n = rng.randint(1, 4)
            b = rand_matrix(rng, n, rng.randint(1, n), complex_=True)
            m = b @ b.H
            terms = ldl_terms(m)
            assert len(terms) == rank_exact(m)
            total = Matrix.zeros(n)
            for d, v in terms:
                assert d > 0
                total = total + (v @ v.H).scale(d)
            assert total == m


class TestMatrix:
    def test_json_roundtrip(self):
        rng = random.Random(5)
        m = rand_matrix(rng, 3, 2, complex_=True, den=4)
        assert matrix_from_json(matrix_to_json(m)) == m

    def test_kron_blocks(self):
        a = Matrix([[1, 2], [3, 4]])
        b = Matrix([[0, 1], [1, 0]])
        k = a.kron(b)
        assert k.submatrix(2, 4, 0, 2) == b.scale(3)

    def test_vec_unvec(self):
        m = Matrix([[1, 2], [3, 4]])
        assert [str(x) for x in m.vec().entries()] == ["1", "3", "2", "4"]
        assert Matrix.unvec(m.vec(), 2) == m

    def test_immutable_hash(self):
        a = Matrix([[1, 2], [3, 4]])
        assert hash(a) == hash(Matrix([[1, 2], [3, 4]]))
        assert len({a, Matrix([[1, 2], [3, 4]])}) == 1
