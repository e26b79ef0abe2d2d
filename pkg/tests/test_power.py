"""
Tests for power profiles, the SVD precoder and the three allocation schemes
"""
import numpy as np
import pytest

from analysis import AreaGrid, EffectiveSpectrum, gamma_se, se_fixed_point
from channel import ChannelMatrix, ChannelSpec, generate_channel, identity_channel
from power import (
    GradientMethod,
    ObjectiveKind,
    PowerProfile,
    build_precoder,
    channel_singular_values,
    goal_samples,
    inner_maxmin,
    kkt_gap,
    optimize_pa_capacity,
    optimize_pa_map,
    phi_se_inverse,
    project_simplex,
    read_power_profile,
    reached_ber,
    water_filling,
    water_level,
    write_power_profile,
)
from prior import GaussianPrior, qpsk
from utils.errors import DimensionError, NoCrossingError


@pytest.fixture(scope="module")
def qpsk_prior():
    return qpsk()


class TestPowerProfile:
    """Test profile validation and CSV files"""

    def test_uniform(self):
        profile = PowerProfile.uniform(4, 4.0)
        np.testing.assert_array_equal(profile.p, np.ones(4))
        assert profile.objective_kind is ObjectiveKind.AVERAGE

    def test_read_only(self):
        profile = PowerProfile.uniform(2, 2.0)
        with pytest.raises(ValueError):
            profile.p[0] = 5.0

    def test_rejects_wrong_total(self):
        with pytest.raises(ValueError):
            PowerProfile(np.array([1.0, 2.0]), 2.0)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            PowerProfile(np.array([3.0, -1.0]), 2.0)

    def test_csv_round_trip(self, tmp_path):
        profile = PowerProfile(np.array([0.875, 0.125]), 1.0, ObjectiveKind.WATER_FILLING)
        path = write_power_profile(profile, np.array([2.0, 1.0]), tmp_path / "profile.csv")
        loaded, sigmas = read_power_profile(path, ObjectiveKind.WATER_FILLING)
        np.testing.assert_array_equal(loaded.p, profile.p)
        np.testing.assert_array_equal(sigmas, [2.0, 1.0])
        assert path.read_text().splitlines()[0] == "index,sigma_i,p_i"

    def test_csv_length_check(self, tmp_path):
        with pytest.raises(ValueError):
            write_power_profile(PowerProfile.uniform(2, 2.0), np.ones(3), tmp_path / "bad.csv")


class TestProjectSimplex:
    """Test the Euclidean simplex projection"""

    def test_inside_point_unchanged(self):
        np.testing.assert_allclose(project_simplex([0.25, 0.75], 1.0), [0.25, 0.75])

    def test_clips_to_vertex(self):
        np.testing.assert_allclose(project_simplex([2.0, 0.0], 1.0), [1.0, 0.0])

    def test_shift(self):
        np.testing.assert_allclose(project_simplex([1.0, 1.0, 1.0], 1.5), [0.5, 0.5, 0.5])

    def test_result_feasible(self, rng):
        p = project_simplex(rng.standard_normal(16), 3.0)
        assert np.all(p >= 0.0)
        assert p.sum() == pytest.approx(3.0, abs=1e-12)

    def test_positive_total(self):
        with pytest.raises(ValueError):
            project_simplex([1.0], 0.0)


class TestWaterFilling:
    """Test p_i = max(mu - 1/g_i, 0)"""

    def test_two_subchannels(self):
        """gains (4, 1), P = 1: mu = 1.125, p = (0.875, 0.125)"""
        assert water_level([4.0, 1.0], 1.0) == pytest.approx(1.125, abs=1e-12)
        np.testing.assert_allclose(water_filling([4.0, 1.0], 1.0).p, [0.875, 0.125], atol=1e-12)

    def test_equal_gains(self):
        np.testing.assert_allclose(water_filling([1.0, 1.0], 2.0).p, [1.0, 1.0], atol=1e-12)

    def test_weak_subchannel_off(self):
        """gains (10, 0.01), P = 0.1: all power on the strong subchannel"""
        profile = water_filling([10.0, 0.01], 0.1)
        np.testing.assert_allclose(profile.p, [0.1, 0.0], atol=1e-12)
        assert profile.objective_kind is ObjectiveKind.WATER_FILLING

    def test_zero_gain_gets_nothing(self):
        profile = water_filling([2.0, 0.0, 1.0], 3.0)
        assert profile.p[1] == 0.0
        assert profile.p.sum() == pytest.approx(3.0, abs=1e-12)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            water_filling([-1.0, 1.0], 1.0)
        with pytest.raises(ValueError):
            water_filling([0.0, 0.0], 1.0)
        with pytest.raises(ValueError):
            water_filling([1.0, 1.0], 0.0)


class TestPrecoder:
    """Test P = V_A diag(sqrt(p))"""

    def test_identity_uniform(self):
        factors, spectrum = build_precoder(identity_channel(8), PowerProfile.uniform(8, 8.0), 0.1)
        np.testing.assert_allclose(spectrum.d, np.ones(8))
        gram = factors.precoder.conj().T @ factors.precoder
        np.testing.assert_allclose(gram, np.eye(8), atol=1e-12)

    def test_zero_power_entry(self):
        profile = PowerProfile(np.array([2.0, 0.0, 1.0, 1.0]), 4.0)
        _, spectrum = build_precoder(ChannelMatrix.from_diagonal([2.0, 1.5, 1.0, 0.5]), profile, 1.0)
        np.testing.assert_allclose(spectrum.d, [8.0, 0.0, 1.0, 0.25])

    def test_random_channel_spectrum(self):
        """Precoded Gram eigenvalues equal p_i sigma_i^2"""
        channel = generate_channel(ChannelSpec(n=32, paths=3, max_delay_taps=4, seed=3))
        sigmas = channel_singular_values(channel)
        profile = water_filling(sigmas ** 2 / 0.1, 32.0)
        factors, spectrum = build_precoder(channel, profile, 0.1)
        effective = channel.matrix @ factors.precoder
        eig = np.sort(np.linalg.eigvalsh(effective.conj().T @ effective))
        np.testing.assert_allclose(eig, np.sort(profile.p * sigmas ** 2), atol=1e-8)
        assert spectrum.n == 32

    def test_size_mismatch(self):
        with pytest.raises(DimensionError):
            build_precoder(identity_channel(4), PowerProfile.uniform(3, 3.0), 1.0)


class TestPhiInverse:
    """Test the inverse of the denoiser transfer function"""

    def test_gaussian_has_no_crossing(self):
        with pytest.raises(NoCrossingError):
            phi_se_inverse(0.5, GaussianPrior())

    @pytest.mark.parametrize("v", [0.999, 0.01])
    def test_qpsk_residual(self, qpsk_prior, v):
        """mmse(rho) (1/v + rho) = 1 at the returned rho"""
        rho = phi_se_inverse(v, qpsk_prior)
        assert abs(qpsk_prior.mmse(rho) * (1.0 / v + rho) - 1.0) <= 1e-9

    def test_vectorized(self, qpsk_prior):
        v = np.array([0.5, 0.1])
        rho = phi_se_inverse(v, qpsk_prior)
        assert rho.shape == (2,) and rho[1] > rho[0]

    def test_range(self, qpsk_prior):
        with pytest.raises(ValueError):
            phi_se_inverse(1.0, qpsk_prior)


def _db_for_ber(ber_at, target, lo=-5.0, hi=30.0, steps=30):
    """Smallest snr in dB with ber_at(noise_var) <= target, by bisection."""
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if ber_at(10.0 ** (-mid / 10.0)) <= target:
            hi = mid
        else:
            lo = mid
    return hi


class TestMapAllocation:
    """Test the max-min program and the v_goal search"""

    def test_goal_samples(self):
        samples = goal_samples(0.01, 4)
        np.testing.assert_allclose(samples, [0.01, 10 ** -1.5, 0.1, 10 ** -0.5])

    def test_identity_stays_uniform(self, qpsk_prior):
        """Equal singular values: every subgradient is a multiple of 1"""
        result = inner_maxmin(goal_samples(0.1, 20), np.ones(8), qpsk_prior, 0.25, 8.0, iterations=50)
        np.testing.assert_allclose(result.p, np.ones(8), atol=1e-12)

    def test_rejects_gaussian(self, two_atom_sigmas):
        with pytest.raises(ValueError):
            optimize_pa_map(two_atom_sigmas, GaussianPrior(), 0.25, 2.0)

    def test_rejects_bad_samples(self, qpsk_prior):
        with pytest.raises(ValueError):
            inner_maxmin([0.5, 1.0], np.ones(2), qpsk_prior, 0.25, 2.0)

    def test_single_sample_matches_grid_search(self, qpsk_prior, two_atom_sigmas):
        """N = 2, V_goal = {v0}: the ascent reaches the best of 1000 grid points on p_1"""
        v0, noise_var, p_sum = 0.05, 0.1, 2.0
        result = inner_maxmin([v0], two_atom_sigmas, qpsk_prior, noise_var, p_sum, iterations=400)
        target = phi_se_inverse(v0, qpsk_prior)
        grid = np.linspace(0.0, p_sum, 1000)
        values = [
            float(gamma_se(v0, EffectiveSpectrum.from_singular_values(two_atom_sigmas, np.array([p1, p_sum - p1]), noise_var)))
            - target
            for p1 in grid
        ]
        assert result.value == pytest.approx(max(values), abs=1e-3)

    def test_objective_concave_in_power(self, qpsk_prior, rng):
        """gamma_SE(v, p) - phi_SE^{-1}(v) at midpoints beats the endpoint average on 100 segments"""
        sigmas = np.sqrt(np.array([4.0, 1.0, 0.5, 0.25, 0.05]))
        v0, noise_var, p_sum = 0.1, 0.2, 5.0

        def objective(p):
            return float(gamma_se(v0, EffectiveSpectrum.from_singular_values(sigmas, p, noise_var)))

        for _ in range(100):
            a = p_sum * rng.dirichlet(np.ones(sigmas.size))
            b = p_sum * rng.dirichlet(np.ones(sigmas.size))
            assert objective(0.5 * (a + b)) >= 0.5 * (objective(a) + objective(b)) - 1e-10

    @pytest.mark.slow
    def test_map_profile_not_worse_than_uniform(self, two_atom_sigmas, qpsk_prior):
        """Two-atom toy at noise 0.5: the allocation never loses BER to uniform power"""
        noise_var = 0.5
        profile = optimize_pa_map(two_atom_sigmas, qpsk_prior, noise_var, 2.0, iterations=400)
        assert profile.p.sum() == pytest.approx(2.0, abs=1e-9)
        tuned = reached_ber(two_atom_sigmas, profile.p, qpsk_prior, noise_var)
        uniform = reached_ber(two_atom_sigmas, np.ones(2), qpsk_prior, noise_var)
        assert tuned <= uniform + 1e-9

    @pytest.mark.slow
    def test_sampled_goal_must_be_reached_by_state_evolution(self, two_atom_sigmas, qpsk_prior):
        """sigma^2 = (4, 0.25), noise 0.25: a profile whose SE stalls early is never returned"""
        noise_var = 0.25
        profile = optimize_pa_map(two_atom_sigmas, qpsk_prior, noise_var, 2.0)
        spec = EffectiveSpectrum.from_singular_values(two_atom_sigmas, profile.p, noise_var)
        uniform = EffectiveSpectrum.from_singular_values(two_atom_sigmas, np.ones(2), noise_var)
        assert se_fixed_point(spec, qpsk_prior).rho_star >= se_fixed_point(uniform, qpsk_prior).rho_star - 1e-9
        assert reached_ber(two_atom_sigmas, profile.p, qpsk_prior, noise_var) <= reached_ber(
            two_atom_sigmas, np.ones(2), qpsk_prior, noise_var) + 1e-9

    @pytest.mark.slow
    def test_strict_gain_at_ten_db(self, two_atom_sigmas, qpsk_prior):
        """snr = 10 dB: power moves to the strong subchannel and rho* grows"""
        noise_var = 0.1
        profile = optimize_pa_map(two_atom_sigmas, qpsk_prior, noise_var, 2.0)
        assert profile.objective_kind is ObjectiveKind.MAP_BER
        np.testing.assert_allclose(profile.p, [1.35, 0.65], atol=0.05)
        tuned = se_fixed_point(EffectiveSpectrum.from_singular_values(two_atom_sigmas, profile.p, noise_var), qpsk_prior)
        flat = se_fixed_point(EffectiveSpectrum.from_singular_values(two_atom_sigmas, np.ones(2), noise_var), qpsk_prior)
        assert tuned.rho_star >= 1.2 * flat.rho_star
        assert reached_ber(two_atom_sigmas, profile.p, qpsk_prior, noise_var) < reached_ber(
            two_atom_sigmas, np.ones(2), qpsk_prior, noise_var)

    @pytest.mark.slow
    def test_permutation_equivariant(self, qpsk_prior):
        """Permuting sigma_i permutes p*"""
        sigmas = np.sqrt(np.array([4.0, 1.0, 0.25]))
        order = np.array([2, 0, 1])
        base = optimize_pa_map(sigmas, qpsk_prior, 0.1, 3.0, iterations=400)
        moved = optimize_pa_map(sigmas[order], qpsk_prior, 0.1, 3.0, iterations=400)
        np.testing.assert_allclose(moved.p, base.p[order], atol=1e-3)

    @pytest.mark.slow
    def test_one_db_gain_on_doubly_selective_channel(self, small_channel_spec, qpsk_prior):
        """N = 256: MAP-BER power reaches BER 1e-3 at least 1 dB below uniform power"""
        n = 256
        sigmas = channel_singular_values(generate_channel(small_channel_spec.model_copy(update={"n": n})))
        flat = np.ones(n)
        uniform_db = _db_for_ber(lambda nv: reached_ber(sigmas, flat, qpsk_prior, nv), 1e-3)
        noise_var = 10.0 ** (-(uniform_db - 1.0) / 10.0)
        profile = optimize_pa_map(sigmas, qpsk_prior, noise_var, float(n), iterations=400)
        assert reached_ber(sigmas, profile.p, qpsk_prior, noise_var) <= 1e-3


class TestCapacityAllocation:
    """Test projected-gradient capacity allocation"""

    def test_identity_uniform(self, qpsk_prior):
        profile = optimize_pa_capacity(np.ones(4), qpsk_prior, 0.25, 4.0)
        np.testing.assert_allclose(profile.p, np.ones(4), atol=1e-12)
        assert profile.objective_kind is ObjectiveKind.CAPACITY

    def test_gaussian_prior_is_water_filling(self):
        """Gaussian symbols: the capacity-optimal profile is water-filling"""
        sigmas = np.sqrt(np.array([4.0, 1.0, 0.25, 0.05]))
        expected = water_filling(sigmas ** 2, 4.0).p
        np.testing.assert_allclose(expected, [2.375, 1.625, 0.0, 0.0], atol=1e-12)
        profile = optimize_pa_capacity(sigmas, GaussianPrior(), 1.0, 4.0)
        np.testing.assert_allclose(profile.p, expected, atol=1e-3)

    def test_stops_at_stationary_point(self, qpsk_prior):
        sigmas = np.sqrt(np.array([3.0, 1.0, 0.5, 0.1]))
        grid = AreaGrid.build(qpsk_prior)
        profile = optimize_pa_capacity(sigmas, qpsk_prior, 0.5, 4.0, grid=grid)
        g = grid.gradient(sigmas ** 2 / 0.5, profile.p)
        assert kkt_gap(g, profile.p, 4.0) <= 1e-6 * np.max(np.abs(g))

    def test_central_differences_agree(self, qpsk_prior, two_atom_sigmas):
        implicit = optimize_pa_capacity(two_atom_sigmas, qpsk_prior, 0.5, 2.0, max_iters=60)
        central = optimize_pa_capacity(two_atom_sigmas, qpsk_prior, 0.5, 2.0,
                                       gradient=GradientMethod.CENTRAL, max_iters=60)
        np.testing.assert_allclose(implicit.p, central.p, atol=1e-2)

    def test_not_below_uniform_capacity(self, qpsk_prior):
        sigmas = np.sqrt(np.array([4.0, 2.0, 1.0, 0.5, 0.25, 0.1, 0.05, 0.01]))
        noise_var = 0.5
        grid = AreaGrid.build(qpsk_prior)
        profile = optimize_pa_capacity(sigmas, qpsk_prior, noise_var, 8.0, grid=grid)
        gains = sigmas ** 2 / noise_var
        assert grid.integrate(profile.p * gains) >= grid.integrate(gains) - 1e-12

    def test_capacity_concave_in_power(self, qpsk_prior, rng):
        """Area-form capacity at a midpoint is at least the endpoint average"""
        unit_gains = np.array([4.0, 1.0, 0.5, 0.25]) / 0.3
        grid = AreaGrid.build(qpsk_prior)
        for _ in range(30):
            a = 4.0 * rng.dirichlet(np.ones(4))
            b = 4.0 * rng.dirichlet(np.ones(4))
            mid = grid.integrate(0.5 * (a + b) * unit_gains)
            assert mid >= 0.5 * (grid.integrate(a * unit_gains) + grid.integrate(b * unit_gains)) - 1e-9

    def test_permutation_equivariant(self, qpsk_prior):
        sigmas = np.sqrt(np.array([4.0, 1.0, 0.25, 0.05]))
        order = np.array([3, 1, 0, 2])
        grid = AreaGrid.build(qpsk_prior)
        base = optimize_pa_capacity(sigmas, qpsk_prior, 0.5, 4.0, grid=grid)
        moved = optimize_pa_capacity(sigmas[order], qpsk_prior, 0.5, 4.0, grid=grid)
        np.testing.assert_allclose(moved.p, base.p[order], atol=1e-6)

    def test_low_snr_matches_grid_search(self, qpsk_prior, two_atom_sigmas):
        """snr = -10 dB: power goes to the strong subchannel, as a 401-point grid over p_1 finds"""
        noise_var, p_sum = 10.0, 2.0
        grid = AreaGrid.build(qpsk_prior)
        profile = optimize_pa_capacity(two_atom_sigmas, qpsk_prior, noise_var, p_sum, grid=grid)
        unit_gains = two_atom_sigmas ** 2 / noise_var
        candidates = np.linspace(0.0, p_sum, 401)
        values = [grid.integrate(np.array([p1, p_sum - p1]) * unit_gains) for p1 in candidates]
        best = candidates[int(np.argmax(values))]
        assert profile.p[0] == pytest.approx(best, abs=1e-2)
        assert profile.p[0] > profile.p[1]
