import math

import numpy as np
import pytest

from hermite_spectral.config import FilterSpec, HermiteParams
from hermite_spectral.errors import FilterError
from hermite_spectral.hermite_core import (
    CUTOFF_SENTINEL,
    advection_matrix,
    build_dm_scaling,
    build_operators,
    coupling_matrix,
    filter_diffusion_operator,
    filter_sigma,
    force_matrix,
    gauss_hermite_rule,
    hermite_function,
    hermite_he,
    hermite_table,
)


class TestHermitePolynomials:
    @pytest.mark.parametrize(
        "n, xi, expected",
        [(0, 1.7, 1.0), (1, 0.5, 0.5), (2, 2.0, 3.0 / math.sqrt(2.0))],
    )
    def test_known_values(self, n, xi, expected):
        assert hermite_he(n, xi) == pytest.approx(expected, rel=1e-14)

    def test_table_matches_single_evaluations(self):
        xi = np.linspace(-3.0, 3.0, 7)
        table = hermite_table(6, xi)
        for n in range(7):
            np.testing.assert_allclose(table[n], hermite_he(n, xi), rtol=1e-14)

    def test_negative_order_rejected(self):
        with pytest.raises(ValueError):
            hermite_table(-1, 0.0)

    @pytest.mark.parametrize("n", range(0, 21))
    def test_derivative_identity(self, n):
        xi = np.linspace(-4.0, 4.0, 20)
        step = 1e-5
        numeric = (hermite_he(n + 1, xi + step) - hermite_he(n + 1, xi - step)) / (2 * step)
        expected = math.sqrt(n + 1) * hermite_he(n, xi)
        scale = np.max(np.abs(expected))
        assert np.max(np.abs(numeric - expected)) <= 1e-6 * scale


class TestGaussHermiteRule:
    def test_one_point(self):
        nodes, weights = gauss_hermite_rule(1)
        np.testing.assert_array_equal(nodes, [0.0])
        np.testing.assert_array_equal(weights, [1.0])

    def test_two_points(self):
        nodes, weights = gauss_hermite_rule(2)
        np.testing.assert_allclose(nodes, [-1.0, 1.0], atol=1e-14)
        np.testing.assert_allclose(weights, [0.5, 0.5], atol=1e-14)

    def test_twenty_points_orthonormal_pairs(self):
        nodes, weights = gauss_hermite_rule(20)
        assert abs(np.sum(weights * hermite_he(3, nodes) * hermite_he(5, nodes))) <= 1e-12
        assert np.sum(weights * hermite_he(4, nodes) ** 2) == pytest.approx(1.0, abs=1e-12)

    def test_orthonormality_up_to_degree_25(self):
        nodes, weights = gauss_hermite_rule(60)
        table = hermite_table(25, nodes)
        gram = (table * weights) @ table.T
        np.testing.assert_allclose(gram, np.eye(26), atol=1e-11)

    def test_matches_numpy_probabilists_rule(self):
        reference_nodes, reference_weights = np.polynomial.hermite_e.hermegauss(40)
        nodes, weights = gauss_hermite_rule(40)
        np.testing.assert_allclose(nodes, reference_nodes, atol=1e-12)
        np.testing.assert_allclose(weights, reference_weights / reference_weights.sum(), rtol=1e-10)

    @pytest.mark.parametrize("n", [0, 201])
    def test_size_limits(self, n):
        with pytest.raises(ValueError):
            gauss_hermite_rule(n)


class TestDiffusionOperator:
    @pytest.mark.parametrize("n", range(1, 11))
    def test_hermite_functions_are_eigenfunctions(self, n):
        xi = np.linspace(-8.0, 8.0, 16001)
        values = hermite_function(n, xi)
        applied = filter_diffusion_operator(values, xi)
        interior = slice(100, -100)
        error = np.max(np.abs(applied[interior] + n * values[interior]))
        assert error <= 1e-5 * np.max(np.abs(n * values))


class TestMatrices:
    def test_advection_matrix_m1(self):
        np.testing.assert_array_equal(advection_matrix(1), [[0.0, 1.0], [1.0, 0.0]])

    def test_shapes_and_structure(self):
        M = 6
        A, B, G = advection_matrix(M), force_matrix(M), coupling_matrix(M)
        assert A.shape == B.shape == G.shape == (M + 1, M + 1)
        np.testing.assert_array_equal(A, A.T)
        np.testing.assert_array_equal(np.diag(A, 1), np.sqrt(np.arange(1, M + 1)))
        np.testing.assert_array_equal(B[0], 0.0)
        np.testing.assert_array_equal(np.diag(B, -1), np.sqrt(np.arange(1, M + 1)))
        assert G.sum() == 1.0 and G[1, 0] == 1.0

    def test_advection_eigenvalues_are_hermite_roots(self):
        eigenvalues = np.linalg.eigvalsh(advection_matrix(2))
        np.testing.assert_allclose(eigenvalues, [-math.sqrt(3.0), 0.0, math.sqrt(3.0)], atol=1e-14)


class TestFilterSigma:
    def test_hou_li_endpoints(self, hou_li):
        sigma = filter_sigma(90, hou_li, 0.05)
        assert sigma[0] == 1.0
        assert sigma[90] == pytest.approx(math.exp(-36.0), rel=1e-12)
        assert sigma[90] == pytest.approx(2.3195e-16, rel=1e-4)

    def test_threshold_boundary_is_undamped(self):
        spec = FilterSpec(variant="houli-threshold")
        sigma = filter_sigma(30, spec, 0.1)
        assert sigma[20] == 1.0
        assert sigma[21] < 1.0

    def test_cutoff_zeroes_upper_third(self):
        sigma = filter_sigma(30, FilterSpec(variant="cutoff"), 0.1)
        np.testing.assert_array_equal(sigma[:21], 1.0)
        np.testing.assert_array_equal(sigma[21:], 0.0)

    def test_protected_band(self):
        spec = FilterSpec(alpha=36.0, p=2.0, protected=5)
        sigma = filter_sigma(30, spec, 0.1)
        np.testing.assert_array_equal(sigma[:6], 1.0)
        assert sigma[6] < 1.0

    @pytest.mark.parametrize(
        "spec",
        [
            FilterSpec.none(),
            FilterSpec.hou_li(),
            FilterSpec(variant="houli-threshold"),
            FilterSpec(variant="cutoff"),
            FilterSpec(variant="timestep-scaled", dt_ref=0.1),
        ],
    )
    def test_bounded_and_non_increasing(self, spec):
        sigma = filter_sigma(40, spec, 0.05)
        assert np.all((sigma >= 0) & (sigma <= 1))
        assert np.all(np.diff(sigma) <= 0)
        assert sigma[0] == 1.0

    def test_timestep_scaled_composition_ratio(self):
        spec = FilterSpec(variant="timestep-scaled", dt_ref=0.1)
        M, i = 30, 27
        for dt in (1e-2, 1e-3, 1e-4):
            full = math.log(filter_sigma(M, spec, dt)[i])
            half = math.log(filter_sigma(M, spec, dt / 2)[i])
            ratio = full / half
            assert 1.5 <= ratio <= 2.5
            assert ratio == pytest.approx(2.0 ** (1.0 - 0.9**36), rel=1e-10)

    def test_timestep_scaled_matches_exponential_at_reference(self):
        spec = FilterSpec(variant="timestep-scaled", dt_ref=0.1)
        reference = FilterSpec(variant="houli-threshold")
        np.testing.assert_allclose(filter_sigma(30, spec, 0.1), filter_sigma(30, reference, 0.1), rtol=1e-15)

    def test_timestep_scaled_requires_reference_step(self):
        with pytest.raises(ValueError):
            FilterSpec(variant="timestep-scaled")


class TestBuildOperators:
    @pytest.mark.parametrize(
        "spec",
        [FilterSpec.hou_li(), FilterSpec(variant="houli-threshold"), FilterSpec(variant="timestep-scaled", dt_ref=0.2)],
    )
    def test_h_reproduces_sigma(self, params30, spec):
        dt = 0.5 / math.sqrt(30)
        ops = build_operators(params30, spec, dt)
        assert ops.h[0] == 0.0
        assert np.all(ops.h <= 0)
        np.testing.assert_allclose(np.exp(dt * ops.h), ops.sigma, rtol=1e-14)

    def test_cutoff_uses_sentinel(self, params30):
        ops = build_operators(params30, FilterSpec(variant="cutoff"), 0.1)
        assert ops.has_cutoff
        np.testing.assert_array_equal(ops.h[21:], CUTOFF_SENTINEL)

    def test_no_filter_gives_zero_h(self):
        ops = build_operators(HermiteParams.from_period(1), FilterSpec.none(), 0.1)
        np.testing.assert_array_equal(ops.h, 0.0)
        np.testing.assert_array_equal(ops.A, [[0.0, 1.0], [1.0, 0.0]])

    def test_filter_that_damps_nothing_is_rejected(self, params30):
        with pytest.raises(FilterError):
            build_operators(params30, FilterSpec(alpha=0.0), 0.1)

    def test_filter_needs_two_moments(self):
        with pytest.raises(FilterError):
            build_operators(HermiteParams.from_period(1), FilterSpec.hou_li(), 0.1)

    def test_non_positive_step_rejected(self, params30, hou_li):
        with pytest.raises(ValueError):
            build_operators(params30, hou_li, 0.0)

    def test_mode_matrix_with_coupling(self, params30, no_filter):
        ops = build_operators(params30, no_filter, 0.1)
        matrix = ops.mode_matrix(1, with_g=True)
        assert matrix[1, 0] == pytest.approx(-0.5j * (1.0 + 4.0))
        with pytest.raises(ValueError):
            ops.mode_matrix(0, with_g=True)


class TestDmScaling:
    def test_second_entry(self):
        scaling = build_dm_scaling(HermiteParams.from_wavenumber(3, 0.5), 1)
        assert scaling[0] == 1.0
        assert scaling[1] == pytest.approx(0.5 / math.sqrt(1.25), rel=1e-14)

    def test_conjugated_entry(self):
        params = HermiteParams.from_wavenumber(3, 0.5)
        d = build_dm_scaling(params, 1)
        matrix = advection_matrix(3) + coupling_matrix(3) / 0.25
        conjugated = np.diag(d) @ matrix @ np.diag(1.0 / d)
        assert conjugated[0, 1] == pytest.approx(math.sqrt(5.0), rel=1e-14)

    @pytest.mark.parametrize("M", [10, 30])
    @pytest.mark.parametrize("m", range(1, 11))
    def test_similarity_symmetrizes(self, M, m):
        params = HermiteParams.from_period(M)
        d = build_dm_scaling(params, m)
        mk = m * params.k
        conjugated = np.diag(d) @ (advection_matrix(M) + coupling_matrix(M) / mk**2) @ np.diag(1.0 / d)
        assert np.max(np.abs(conjugated - conjugated.T)) <= 1e-13

    def test_large_mode_approaches_identity(self):
        d = build_dm_scaling(HermiteParams.from_period(10), 10_000)
        np.testing.assert_allclose(d, 1.0, atol=1e-8)

    def test_operator_set_caches_scaling(self, params30, hou_li):
        ops = build_operators(params30, hou_li, 0.1)
        first = ops.dm(3)
        np.testing.assert_array_equal(first, build_dm_scaling(params30, 3))
        assert ops.dm(3) is first
        np.testing.assert_array_equal(ops.dm(-3), first)

    def test_negative_mode_uses_magnitude(self):
        params = HermiteParams.from_period(10)
        np.testing.assert_array_equal(build_dm_scaling(params, -2), build_dm_scaling(params, 2))

    def test_zero_mode_rejected(self, params30):
        with pytest.raises(ValueError):
            build_dm_scaling(params30, 0)
