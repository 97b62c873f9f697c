import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from ghx.errors import ContractError, DegenerateInputError, PreconditionError
from ghx.herm import (HermitianForm, MatrixFormatError, MetricPencil, RealBasis, format_matrix_text,
                      inner, parse_complex, parse_matrix_text, pencil_eigenvalues, proportionality)
from oracles import complex_hermitian, random_pd

seeds = st.integers(0, 2 ** 32 - 1)
dims = st.integers(1, 6)


class TestHermitianForm:
    def test_lower_triangle_is_mirrored_from_upper(self):
        h = HermitianForm([[1, 2 + 1j], [99, 3 + 5j]])
        assert h.matrix[1, 0] == 2 - 1j
        assert h.matrix[1, 1] == 3

    def test_immutable(self):
        h = HermitianForm.identity(2)
        with pytest.raises(ValueError):
            h.matrix[0, 0] = 5
        with pytest.raises(AttributeError):
            h.foo = 1

    def test_rejects_non_square(self):
        with pytest.raises(ContractError):
            HermitianForm(np.zeros((2, 3)))

    def test_arithmetic_and_equality(self):
        a, b = HermitianForm.diag([1, 2]), HermitianForm.identity(2)
        assert a + b == HermitianForm.diag([2, 3])
        assert a - b == HermitianForm.diag([0, 1])
        assert 2 * a == a * 2 == HermitianForm.diag([2, 4])
        assert a / 2 == HermitianForm.diag([0.5, 1])
        assert -a == HermitianForm.diag([-1, -2])
        assert HermitianForm.zeros(3).norm() == 0


class TestMetricPencil:
    def test_rejects_indefinite(self):
        with pytest.raises(PreconditionError):
            MetricPencil(np.diag([1.0, -1.0]))

    def test_rejects_ill_conditioned(self):
        with pytest.raises(PreconditionError):
            MetricPencil(np.diag([1.0, 1e-12]))

    @given(seeds, dims)
    def test_reduce_is_hermitian_and_exact(self, seed, n):
        rng = np.random.default_rng(seed)
        G = MetricPencil(random_pd(rng, n))
        a = complex_hermitian(rng, n)
        r = G.reduce(a)
        assert np.array_equal(r, r.conj().T)
        L = G.factor
        assert np.allclose(L @ r @ L.conj().T, a, atol=1e-10 * (1 + np.abs(a).max()))


class TestPencilEigenvalues:
    def test_examples(self):
        assert np.allclose(pencil_eigenvalues(np.diag([2.0, 4.0]), MetricPencil(np.diag([1.0, 2.0]))), [2, 2])
        assert np.allclose(pencil_eigenvalues(np.eye(3), MetricPencil.identity(3)), [1, 1, 1])
        assert np.allclose(pencil_eigenvalues(np.diag([1.0, 2, 3]), MetricPencil.identity(3)), [1, 2, 3])

    @given(seeds, dims)
    def test_matches_generalized_eigensolver(self, seed, n):
        rng = np.random.default_rng(seed)
        g = random_pd(rng, n)
        a = complex_hermitian(rng, n)
        ref = scipy.linalg.eigh(a, g, eigvals_only=True)
        got = pencil_eigenvalues(a, MetricPencil(g))
        assert np.allclose(got, ref, atol=1e-9 * (1 + np.abs(ref).max()))

    @given(seeds, dims)
    def test_congruence_invariance(self, seed, n):
        rng = np.random.default_rng(seed)
        g = random_pd(rng, n)
        a = complex_hermitian(rng, n)
        M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)) + 3 * np.eye(n)
        base = pencil_eigenvalues(a, MetricPencil(g))
        moved = pencil_eigenvalues(M.conj().T @ a @ M, MetricPencil(M.conj().T @ g @ M))
        assert np.allclose(moved, base, atol=1e-9 * (1 + np.abs(base).max()))


class TestInnerAndBasis:
    def test_examples(self):
        assert inner(np.eye(3), np.eye(3)) == 3
        assert inner(np.diag([1.0, 2]), np.diag([3.0, 4])) == 11
        basis = RealBasis(2)
        assert inner(basis.matrices[2], basis.matrices[3]) == 0

    @pytest.mark.parametrize("n", [1, 2, 3, 5])
    def test_basis_is_orthogonal_with_stated_norms(self, n):
        b = RealBasis(n)
        gram = np.array([[inner(x, y) for y in b.matrices] for x in b.matrices])
        assert np.array_equal(gram, np.diag(b.sq_norms))
        assert b.dim == len(b) == n * n

    def test_ordering_interleaves_each_pair(self):
        b = RealBasis(3)
        assert b.matrices[3][0, 1] == 1 and b.matrices[4][0, 1] == 1j
        assert b.matrices[5][0, 2] == 1 and b.matrices[6][0, 2] == 1j
        assert b.matrices[7][1, 2] == 1 and b.matrices[8][1, 2] == 1j

    @given(seeds, dims)
    def test_coords_round_trip(self, seed, n):
        rng = np.random.default_rng(seed)
        a = complex_hermitian(rng, n)
        b = RealBasis(n)
        assert np.allclose(b.from_coords(b.coords(a)), a, atol=1e-14)


class TestProportionality:
    def test_examples(self):
        assert proportionality(3 * np.eye(2), np.eye(2)) == pytest.approx(3)
        assert proportionality(np.diag([1.0, 2]), np.eye(2)) is None
        e11 = np.diag([1.0, 0])
        assert proportionality(2 * np.eye(2) + 1e-12 * e11, np.eye(2), 1e-9) == pytest.approx(2)

    def test_zero_reference_rejected(self):
        with pytest.raises(DegenerateInputError):
            proportionality(np.eye(2), np.zeros((2, 2)))


class TestTextFormat:
    @pytest.mark.parametrize("token,value", [
        ("3", 3), ("-1.5", -1.5), ("2i", 2j), ("-i", -1j), ("i", 1j), ("+i", 1j),
        ("1-2i", 1 - 2j), ("1e-3-2i", 1e-3 - 2j), ("-2.5e+2+1e-1i", -250 + 0.1j), ("0+0i", 0),
    ])
    def test_parse_complex(self, token, value):
        assert parse_complex(token) == value

    @pytest.mark.parametrize("token", ["", "1j", "abc", "1+", "2ii"])
    def test_parse_complex_rejects(self, token):
        with pytest.raises(ValueError):
            parse_complex(token)

    def test_comments_and_blank_lines(self):
        text = "# header\n2\n\n1 2i  # first row\n-2i 3\n"
        assert parse_matrix_text(text) == HermitianForm([[1, 2j], [-2j, 3]])

    @pytest.mark.parametrize("text,line,column", [
        ("2\n1 0\n0 x\n", 3, 2),
        ("2\n1 0\n", 2, None),
        ("2\n1 0 0\n0 1\n", 2, 3),
        ("2\n1 2\n3 1\n", 3, 1),
        ("2\n1i 0\n0 1\n", 2, 1),
        ("x\n", 1, 1),
    ])
    def test_errors_name_line_and_column(self, text, line, column):
        with pytest.raises(MatrixFormatError) as info:
            parse_matrix_text(text)
        assert info.value.line == line
        assert info.value.column == column

    @given(seeds, dims)
    def test_format_round_trip_is_exact(self, seed, n):
        a = complex_hermitian(np.random.default_rng(seed), n)
        h = HermitianForm(a)
        assert np.array_equal(parse_matrix_text(format_matrix_text(h)).matrix, h.matrix)
