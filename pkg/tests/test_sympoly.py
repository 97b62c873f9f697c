import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ghx.errors import ContractError, DegenerateInputError, PreconditionError
from ghx.herm import MetricPencil
from ghx.hodge import gram_matrix, gram_report
from ghx.sampling import sample_gamma, stream
from ghx.sympoly import (MixedContext, PolyOnLine, TracePowerPolynomial, esp_all, hyperbolic_at,
                         in_cone, in_gamma_m, linearity_dimension, mixed_sigma, mixed_sigma_oracle,
                         polarize, real_rooted, restrict_line, sigma, sigma_batch, sigma_highprec,
                         sigmas)
from oracles import complex_hermitian, esp_charpoly, mixed_rows, random_pd

I2, I3 = MetricPencil.identity(2), MetricPencil.identity(3)
D33 = np.diag([3.0, 3.0, -1.0])
seeds = st.integers(0, 2 ** 32 - 1)


@st.composite
def degree_problems(draw, max_n=5):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(1, n))
    return n, m, draw(seeds)


class TestSigma:
    def test_examples(self):
        assert sigma(np.diag([1.0, 2, 3]), I3, 2) == pytest.approx(11)
        assert sigma(np.eye(3), I3, 2) == pytest.approx(3)
        assert sigma(D33, I3, 2) == pytest.approx(3)
        assert sigma(D33, I3, 3) == pytest.approx(-9)

    def test_identity_gives_binomials(self):
        for n in range(1, 6):
            assert np.allclose(sigmas(np.eye(n), MetricPencil.identity(n), n),
                               [math.comb(n, k) for k in range(1, n + 1)])

    def test_degree_bounds(self):
        with pytest.raises(ContractError):
            sigma(np.eye(2), I2, 3)

    @given(degree_problems())
    def test_matches_characteristic_polynomial(self, prob):
        n, m, seed = prob
        rng = np.random.default_rng(seed)
        g, a = random_pd(rng, n), complex_hermitian(rng, n)
        ref = esp_charpoly(a, g, m)
        assert sigma(a, MetricPencil(g), m) == pytest.approx(ref, rel=1e-9, abs=1e-9 * np.abs(a).max() ** m)

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(0)
        G = MetricPencil(random_pd(rng, 4))
        stack = np.array([complex_hermitian(rng, 4) for _ in range(7)])
        assert np.allclose(sigma_batch(stack, G, 3), [sigma(a, G, 3) for a in stack], rtol=1e-13)

    def test_esp_all_small(self):
        assert np.allclose(esp_all(np.array([1.0, 2.0, 3.0]), 3), [1, 6, 11, 6])

    def test_high_precision_agrees(self):
        rng = np.random.default_rng(1)
        G = MetricPencil(random_pd(rng, 4))
        a = complex_hermitian(rng, 4)
        assert float(sigma_highprec(a, G, 3)) == pytest.approx(sigma(a, G, 3), rel=1e-10)


class TestPolarization:
    @pytest.mark.parametrize("fn", [mixed_sigma, mixed_sigma_oracle])
    def test_examples(self, fn):
        s2 = MixedContext(2, I2)
        assert float(fn(s2, [np.diag([1.0, 2]), np.eye(2)])) == pytest.approx(1.5)
        assert float(fn(MixedContext(3, I3), [np.diag([1.0, 2, 3])] * 3)) == pytest.approx(6)
        assert float(fn(s2, [np.diag([1.0, 0]), np.diag([0.0, 1])])) == pytest.approx(0.5)

    def test_oracle_zero_argument(self):
        ctx = MixedContext(3, I3)
        assert mixed_sigma_oracle(ctx, [np.zeros((3, 3)), np.eye(3), D33]) == 0

    def test_fixed_slots(self):
        ctx = MixedContext(3, I3, fixed=(D33,))
        assert ctx.degree == 2
        b = np.diag([1.0, 2, 3])
        assert mixed_sigma(ctx, [b, np.eye(3)]) == pytest.approx(mixed_rows([D33, b, np.eye(3)]))

    def test_wrong_argument_count(self):
        with pytest.raises(ContractError):
            mixed_sigma(MixedContext(2, I2), [np.eye(2)])

    @given(degree_problems())
    def test_matches_row_mixing_oracle(self, prob):
        n, m, seed = prob
        rng = np.random.default_rng(seed)
        g = random_pd(rng, n)
        args = [complex_hermitian(rng, n) for _ in range(m)]
        ref = mixed_rows(args, g)
        got = mixed_sigma(MixedContext(m, MetricPencil(g)), args)
        scale = np.prod([np.linalg.norm(a) for a in args]) / np.linalg.eigvalsh(g)[0] ** m
        assert abs(got - ref) <= 1e-10 * scale

    @given(degree_problems(), st.randoms(use_true_random=False))
    def test_permutation_symmetry(self, prob, pyrandom):
        n, m, seed = prob
        rng = np.random.default_rng(seed)
        G = MetricPencil(random_pd(rng, n))
        args = [complex_hermitian(rng, n) for _ in range(m)]
        perm = list(args)
        pyrandom.shuffle(perm)
        ctx = MixedContext(m, G)
        a, b = mixed_sigma(ctx, args), mixed_sigma(ctx, perm)
        assert abs(a - b) <= 1e-10 * max(abs(a), 1e-300) or abs(a - b) <= 1e-12 * np.prod(
            [np.linalg.norm(x) for x in args])

    @given(degree_problems())
    def test_multilinear_in_first_argument(self, prob):
        n, m, seed = prob
        rng = np.random.default_rng(seed)
        ctx = MixedContext(m, MetricPencil(random_pd(rng, n)))
        x, y = complex_hermitian(rng, n), complex_hermitian(rng, n)
        rest = [complex_hermitian(rng, n) for _ in range(m - 1)]
        s, t = rng.standard_normal(2)
        lhs = mixed_sigma(ctx, [s * x + t * y] + rest)
        rhs = s * mixed_sigma(ctx, [x] + rest) + t * mixed_sigma(ctx, [y] + rest)
        scale = (abs(s) + abs(t)) * np.prod([np.linalg.norm(r) for r in rest]) * (
            np.linalg.norm(x) + np.linalg.norm(y))
        assert abs(lhs - rhs) <= 1e-10 * scale

    @given(degree_problems())
    def test_diagonal_is_sigma(self, prob):
        n, m, seed = prob
        rng = np.random.default_rng(seed)
        G = MetricPencil(random_pd(rng, n))
        a = complex_hermitian(rng, n)
        assert mixed_sigma(MixedContext(m, G), [a] * m) == pytest.approx(
            sigma(a, G, m), rel=1e-9, abs=1e-10 * np.linalg.norm(a) ** m)

    def test_grouped_multiplicities_match_expanded(self):
        rng = np.random.default_rng(5)
        G = MetricPencil(random_pd(rng, 5))
        a, b = complex_hermitian(rng, 5), complex_hermitian(rng, 5)
        grouped = float(polarize(G, [a, b], [2, 3]))
        expanded = float(polarize(G, [a, a, b, b, b], [1] * 5))
        assert grouped == pytest.approx(expanded, rel=1e-10)


class TestLines:
    def test_restrict_examples(self):
        s2 = MixedContext(2, I2)
        assert restrict_line(s2, np.eye(2), np.diag([1.0, 2])).coefficients == pytest.approx((2, 3, 1))
        assert restrict_line(MixedContext(3, I3), np.eye(3), np.zeros((3, 3))).coefficients == \
            pytest.approx((0, 0, 0, 1))

    @given(degree_problems())
    def test_restrict_negative_direction(self, prob):
        n, m, seed = prob
        rng = np.random.default_rng(seed)
        G = MetricPencil(random_pd(rng, n))
        a = complex_hermitian(rng, n)
        p = restrict_line(MixedContext(m, G), a, -a)
        want = np.polynomial.polynomial.polypow([-1.0, 1.0], m) * sigma(a, G, m)
        assert np.allclose(p.coefficients, want, atol=1e-9 * np.linalg.norm(a) ** m)

    @pytest.mark.parametrize("coeffs,expected", [((2.0, 3, 1), True), ((1.0, 0, 1), False),
                                                 ((1.0, -2, 1), True), ((-1.0, 3, -3, 1), True)])
    def test_real_rooted(self, coeffs, expected):
        assert real_rooted(PolyOnLine(coeffs)) is expected

    def test_multiple_roots_are_recovered(self):
        r = PolyOnLine((1.0, 4, 6, 4, 1)).roots()
        assert np.allclose(r, -1, atol=1e-12)
        close_pair = PolyOnLine((1 - 1e-10, -(2 - 1e-10), 1.0)).roots()
        assert np.allclose(np.sort(close_pair.real), [1 - 1e-10, 1], atol=1e-12)

    def test_zero_polynomial(self):
        with pytest.raises(DegenerateInputError):
            PolyOnLine((0.0, 0.0)).roots()

    def test_degree_drop(self):
        assert PolyOnLine((2.0, 1.0, 1e-17)).roots() == pytest.approx([-2])


class TestHyperbolicity:
    def test_sigma2_is_hyperbolic_at_identity(self):
        res = hyperbolic_at(MixedContext(2, I3), np.eye(3), samples=1000, seed=0)
        assert res.hyperbolic and res.samples == 1000

    def test_split_signature_form_is_not(self):
        poly = gram_report(np.diag([1.0, 1, -1, -1]), 2).as_polynomial()
        res = hyperbolic_at(poly, np.eye(2), samples=1000, seed=0)
        assert not res.hyperbolic
        assert res.witness is not None
        assert np.abs(res.witness_roots.imag).max() > 1e-3

    def test_direction_on_the_zero_set(self):
        with pytest.raises(PreconditionError):
            hyperbolic_at(MixedContext(2, I2), np.diag([1.0, 0]))

    def test_lorentzian_gram_is_hyperbolic(self):
        poly = gram_matrix([], I3).as_polynomial()
        assert hyperbolic_at(poly, np.eye(3), samples=300).hyperbolic


class TestCones:
    def test_in_cone_examples(self):
        m = in_cone(MixedContext(3, I3), np.eye(3), np.eye(3))
        assert m.member and m.margin == pytest.approx(1, abs=1e-12)
        assert np.allclose(m.roots, -1, atol=1e-12)
        assert in_cone(MixedContext(2, I3), np.eye(3), D33).member
        assert not in_cone(MixedContext(3, I3), np.eye(3), D33).member

    def test_in_gamma_examples(self):
        g2 = in_gamma_m(D33, I3, 2)
        assert g2.member and np.allclose(g2.sigmas, [5, 3])
        g3 = in_gamma_m(D33, I3, 3)
        assert not g3.member and g3.first_failure() == 3
        for m in (1, 2, 3):
            assert in_gamma_m(np.eye(3), I3, m).member
            assert not in_gamma_m(-np.eye(3), I3, m).member

    @given(degree_problems(max_n=4))
    def test_root_test_agrees_with_sigma_signs(self, prob):
        n, m, seed = prob
        rng = np.random.default_rng(seed)
        G = MetricPencil(random_pd(rng, n))
        x = complex_hermitian(rng, n) + rng.uniform(0, 2) * G.G.matrix
        by_margin = in_gamma_m(x, G, m, tol=1e-6)
        by_roots = in_cone(MixedContext(m, G), G.G, x, tol=1e-6)
        loose = in_gamma_m(x, G, m, tol=-1e-6)
        # away from the boundary both descriptions must agree
        if by_margin.member == loose.member:
            assert by_roots.member == by_margin.member

    def test_sampled_members_are_members(self):
        rng = stream(11)
        for n in range(2, 6):
            G = MetricPencil(random_pd(rng, n))
            for m in range(1, n + 1):
                xs = sample_gamma(rng, G, m, size=20)
                assert all(in_gamma_m(x, G, m).member for x in xs)


class TestLinearity:
    @pytest.mark.parametrize("n,m", [(2, 2), (3, 2), (3, 3), (4, 2)])
    def test_sigma_is_complete(self, n, m):
        assert linearity_dimension(MixedContext(m, MetricPencil.identity(n)), n) == 0

    def test_hodge_form_is_complete(self):
        assert linearity_dimension(gram_matrix([], I3).as_polynomial(), 3) == 0

    @pytest.mark.parametrize("n,m", [(2, 2), (3, 2), (3, 3)])
    def test_trace_power(self, n, m):
        assert linearity_dimension(TracePowerPolynomial(n, m), n) == n * n - 1
