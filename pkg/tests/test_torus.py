import json
import math

import numpy as np
import pytest

from ghx.errors import AliasingError, ConeViolation, ContractError, PreconditionError
from ghx.herm import MetricPencil
from ghx.hodge import verify_theorem_a
from ghx.sampling import random_hermitian, random_metric, sample_gamma, stream
from ghx.sympoly import mixed_sigma, MixedContext
from ghx.torus import (FormField, ScalarField, TorusContext, apply_operator, ddc, default_grid,
                       export_field, hessian_constant_check, integral_pairing, laplacian_solve,
                       random_potential, read_field, verify_theorem_a_torus)

I2, I3 = MetricPencil.identity(2), MetricPencil.identity(3)
D12, D33 = np.diag([1.0, 2.0]), np.diag([3.0, 3.0, -1.0])


@pytest.fixture(scope="module")
def c2():
    return TorusContext(2, 8)


class TestContext:
    def test_defaults(self):
        assert default_grid(1) == default_grid(2) == 32 and default_grid(3) == 8
        assert TorusContext(3).N == 8 and TorusContext(2).shape == (32,) * 4

    @pytest.mark.parametrize("N", [2, 6, 12])
    def test_grid_must_be_power_of_two(self, N):
        with pytest.raises(ContractError):
            TorusContext(1, N)

    def test_grid_size_cap(self):
        with pytest.raises(ContractError):
            TorusContext(3, 32)

    def test_axis_order(self):
        assert TorusContext(2, 4).axis_names == ["x1", "x2", "y1", "y2"]


class TestScalarField:
    def test_round_trip(self, c2):
        f = random_potential(stream(0), c2)
        back = ScalarField.from_spectrum(c2, f.spectrum)
        assert np.abs(back.values - f.values).max() <= 1e-12 * np.linalg.norm(f.values)

    def test_shape_checked(self, c2):
        with pytest.raises(ContractError):
            ScalarField(c2, np.zeros((8, 8)))

    def test_random_potential_is_band_limited(self, c2):
        f = random_potential(stream(1), c2, modes=12)
        spec = np.abs(f.spectrum)
        assert spec[c2.high_mask].max(initial=0) <= 1e-12 * spec.max()


class TestDdc:
    def test_single_mode(self):
        ctx = TorusContext(1, 16)
        x = ctx.coordinates()[0]
        out = ddc(ScalarField(ctx, np.cos(2 * np.pi * x)))
        assert np.abs(out[..., 0, 0] + np.pi ** 2 * np.cos(2 * np.pi * x)).max() <= 1e-12

    def test_y_mode_and_mixed_entry(self):
        # on exp(i phase): d/dz1 acts as i pi and d/dzbar2 as -pi, so entry (1,2) is -i pi^2 psi
        ctx = TorusContext(2, 8)
        x1, x2, y1, y2 = ctx.coordinates()
        phase = 2 * np.pi * (x1 + y2)
        out = ddc(ScalarField(ctx, np.cos(phase)))
        assert np.allclose(out[..., 0, 1], -1j * np.pi ** 2 * np.cos(phase), atol=1e-11)
        assert np.allclose(out[..., 0, 0], -np.pi ** 2 * np.cos(phase), atol=1e-11)

    def test_constant_gives_zero(self, c2):
        assert np.abs(ddc(ScalarField(c2, np.full(c2.shape, 3.0)))).max() <= 1e-12

    def test_hermitian_and_mean_free(self, c2):
        out = ddc(random_potential(stream(2), c2))
        assert np.abs(out - np.conj(np.swapaxes(out, -1, -2))).max() <= 1e-10
        assert np.abs(out.mean(axis=tuple(range(4)))).max() <= 1e-10 * np.abs(out).max()

    def test_aliasing_guard(self, c2):
        x = c2.coordinates()[0]
        with pytest.raises(AliasingError):
            ddc(ScalarField(c2, np.cos(2 * np.pi * 3 * x)))

    def test_form_field_evaluation(self, c2):
        psi = random_potential(stream(3), c2)
        f = FormField(c2, D12, psi)
        assert np.abs(f.evaluate() - (D12 + ddc(psi))).max() <= 1e-10


class TestIntegralPairing:
    def test_constants(self, c2):
        assert integral_pairing([D12, np.eye(2)], I2, c2) == pytest.approx(1.5)
        assert integral_pairing([np.zeros((2, 2)), np.eye(2)], I2, c2) == 0

    def test_exactness_over_random_potentials(self, c2):
        rng = stream(4)
        G = random_metric(rng, 2)
        worst = 0.0
        for trial in range(200):
            a, b = sample_gamma(rng, G, 2, size=2)
            base = integral_pairing([a, b], G, c2)
            psi = random_potential(stream(4, trial, 1), c2, modes=3, amplitude=0.05)
            got = integral_pairing([FormField(c2, a, psi), b], G, c2)
            worst = max(worst, abs(got - base) / abs(base))
        assert worst <= 1e-10

    def test_dimension_mismatch(self, c2):
        with pytest.raises(ContractError):
            integral_pairing([np.eye(3), np.eye(3)], I3, c2)


class TestLaplacian:
    def test_single_mode(self):
        ctx = TorusContext(1, 16)
        x = ctx.coordinates()[0]
        phi = laplacian_solve(np.eye(1), ScalarField(ctx, np.cos(2 * np.pi * x)))
        assert np.abs(phi.values + np.cos(2 * np.pi * x) / np.pi ** 2).max() <= 1e-13

    def test_zero(self, c2):
        assert np.abs(laplacian_solve(np.eye(2), ScalarField.zeros(c2)).values).max() == 0

    def test_preconditions(self, c2):
        with pytest.raises(PreconditionError):
            laplacian_solve(np.eye(2), ScalarField(c2, np.ones(c2.shape)))
        f = random_potential(stream(5), c2)
        with pytest.raises(PreconditionError):
            laplacian_solve(np.diag([1.0, -1.0]), f)

    @pytest.mark.parametrize("seed", range(3))
    def test_operator_is_the_pairing_with_ddc(self, c2, seed):
        # complex off-diagonal H distinguishes the symbol from its transpose
        rng = stream(13, seed)
        z = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        H = z @ z.conj().T + np.eye(2)
        phi = random_potential(rng, c2)
        direct = np.real(np.einsum("ij,...ji->...", H, ddc(phi)))
        assert np.abs(apply_operator(H, phi).values - direct).max() <= 1e-10 * np.abs(direct).max()

    @pytest.mark.parametrize("seed", range(5))
    def test_spectral_exactness(self, c2, seed):
        rng = stream(6, seed)
        H = sample_gamma(rng, I2, 2) + 0.5 * np.eye(2)
        H = (H + np.abs(np.linalg.eigvalsh(H)).max() * np.eye(2))
        f = random_potential(rng, c2)
        f = ScalarField(c2, f.values - f.mean)
        phi = laplacian_solve(H, f)
        back = apply_operator(H, phi)
        assert np.abs(back.values - f.values).max() <= 1e-10 * np.abs(f.values).max()


class TestTorusPipeline:
    def test_no_noise_is_constant(self):
        ctx = TorusContext(3)
        rep = verify_theorem_a_torus([D33], I3, random_hermitian(stream(7), 3), None, ctx)
        assert rep.ok
        assert rep.pointwise_max == pytest.approx(rep.integrated, rel=1e-12)
        assert rep.integrated == pytest.approx(rep.constant_model, rel=1e-12)

    def test_zero_class_recovers_minus_psi(self):
        ctx = TorusContext(2, 16)
        psi = random_potential(stream(8), ctx)
        rep = verify_theorem_a_torus([D12], I2, np.zeros((2, 2)), psi, ctx)
        assert rep.gauge_residual <= 1e-8
        assert abs(rep.integrated) <= 1e-12 * rep.pointwise_scale
        assert rep.ok

    def test_indefinite_slot_example(self):
        ctx = TorusContext(3)
        rng = stream(9)
        beta = random_hermitian(rng, 3)
        rep = verify_theorem_a_torus([D33], I3, beta, random_potential(rng, ctx), ctx)
        assert rep.ok and rep.integrated < 0
        # same class through the finite-dimensional model
        const = verify_theorem_a([D33], I3)
        assert rep.constant_model == pytest.approx(const.q(rep.beta_class), rel=1e-12)

    def test_gauge_invariance(self, c2):
        rng = stream(10)
        G = random_metric(rng, 2)
        alpha = sample_gamma(rng, G, 2)
        beta = random_hermitian(rng, 2)
        psi = random_potential(rng, c2)
        r1 = verify_theorem_a_torus([alpha], G, beta, psi, c2)
        r2 = verify_theorem_a_torus([alpha], G, beta, ScalarField(c2, psi.values + 4.0), c2)
        r3 = verify_theorem_a_torus([alpha], G, beta, random_potential(rng, c2), c2)
        for r in (r2, r3):
            assert r.ok
            assert r.integrated == pytest.approx(r1.integrated, rel=1e-6)

    def test_cone_violation_propagates(self):
        with pytest.raises(ConeViolation):
            verify_theorem_a_torus([np.eye(3), D33], I3, np.eye(3), None, TorusContext(3, 4))

    def test_all_constant_matches_finite_model(self, c2):
        rng = stream(11)
        G = random_metric(rng, 2)
        alpha = sample_gamma(rng, G, 2)
        beta = random_hermitian(rng, 2)
        rep = verify_theorem_a_torus([alpha], G, beta, None, c2)
        fin = verify_theorem_a([alpha], G)
        assert (rep.integrated < 0) == fin.primitive_negative
        assert rep.integrated == pytest.approx(
            mixed_sigma(MixedContext(2, G), [rep.beta_class, rep.beta_class]), rel=1e-12)


class TestHessian:
    @pytest.mark.parametrize("n,m", [(2, 2), (3, 2), (3, 3)])
    def test_metric_class(self, n, m):
        G = MetricPencil.identity(n)
        h = hessian_constant_check([np.eye(n)], G, TorusContext(n, 4), m=m)
        assert np.allclose(h.c, math.comb(n, m)) and h.equality and h.pointwise_deviation == 0

    def test_garding_numbers(self, c2):
        h = hessian_constant_check([D12, np.eye(2)], I2, c2)
        assert h.integrated == pytest.approx(1.5) and h.rhs == pytest.approx(math.sqrt(2))
        assert h.holds() and not h.equality

    def test_proportional_pair_ratio(self, c2):
        h = hessian_constant_check([3 * D12, D12], I2, c2)
        assert h.equality
        assert h.ratios[(0, 1)] == pytest.approx(3.0)

    def test_cone_violation(self):
        with pytest.raises(ConeViolation):
            hessian_constant_check([D33], I3, TorusContext(3, 4), m=3)


class TestSnapshots:
    def test_round_trip_real_and_complex(self, c2, tmp_path):
        psi = random_potential(stream(12), c2)
        p, side = export_field(tmp_path / "psi.bin", psi.values, c2, "psi")
        vals, ctx = read_field(p)
        assert ctx == c2 and np.array_equal(vals, psi.values)
        meta = json.loads(side.read_text())
        assert meta["axis_order"] == ["x1", "x2", "y1", "y2"] and meta["dtype"] == "float64-le"
        raw = p.read_bytes()
        assert len(raw) == meta["header_bytes"] + 8 * psi.values.size
        field = ddc(psi)
        p2, _ = export_field(tmp_path / "f.bin", field, c2, "ddc")
        back, _ = read_field(p2)
        assert np.array_equal(back, field)

    def test_bad_magic(self, tmp_path):
        (tmp_path / "x.bin").write_bytes(b"nonsense" * 8)
        with pytest.raises(ContractError):
            read_field(tmp_path / "x.bin")
