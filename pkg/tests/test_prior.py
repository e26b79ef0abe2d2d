"""
Tests for symbol priors and their scalar-channel functions
"""
import numpy as np
import pytest
from scipy.special import logsumexp

from prior import GaussianPrior, bpsk, gray_labels, make_prior, qam16, qpsk, sample_symbols
from utils.errors import ConfigError

Q_OF_2 = 0.022750131948179195


@pytest.fixture(scope="module")
def qpsk_prior():
    return qpsk()


class TestConstellations:
    """Test alphabets and labels"""

    @pytest.mark.parametrize("factory,size", [(bpsk, 2), (qpsk, 4), (qam16, 16)])
    def test_unit_power(self, factory, size):
        prior = factory()
        assert prior.points.size == size
        assert np.mean(np.abs(prior.points) ** 2) == pytest.approx(1.0, abs=1e-12)

    def test_gray_labels_adjacent(self):
        """Neighbouring levels differ in one bit"""
        labels = gray_labels(8)
        assert np.all(np.sum(labels[1:] != labels[:-1], axis=1) == 1)

    def test_make_prior_names(self):
        assert make_prior("QPSK").name == "qpsk"
        assert make_prior("16-QAM").name == "16qam"
        assert isinstance(make_prior("gaussian"), GaussianPrior)

    def test_make_prior_unknown(self):
        with pytest.raises(ConfigError):
            make_prior("64qam")

    def test_too_few_nodes(self):
        with pytest.raises(ValueError):
            qpsk(nodes=8)


class TestSampling:
    """Test symbol draws"""

    def test_support_and_bits(self, qpsk_prior):
        s, bits = sample_symbols(qpsk_prior, 500, 3)
        assert bits.shape == (500, 2)
        assert np.all(np.min(np.abs(s[:, None] - qpsk_prior.points[None, :]), axis=1) < 1e-15)

    def test_deterministic(self, qpsk_prior):
        first, _ = sample_symbols(qpsk_prior, 64, 11)
        second, _ = sample_symbols(qpsk_prior, 64, 11)
        np.testing.assert_array_equal(first, second)

    def test_gaussian_has_no_bits(self):
        s, bits = sample_symbols(GaussianPrior(), 10, 0)
        assert s.shape == (10,) and bits.shape == (10, 0)

    def test_needs_symbols(self, qpsk_prior):
        with pytest.raises(ValueError):
            sample_symbols(qpsk_prior, 0, 0)


class TestDenoise:
    """Test posterior-mean denoising"""

    def test_zero_input(self, qpsk_prior):
        """r = 0 on a symmetric constellation gives 0 with variance 1"""
        mean, var = qpsk_prior.denoise(np.zeros(4), 0.5)
        np.testing.assert_allclose(mean, 0.0, atol=1e-15)
        assert var == pytest.approx(1.0, abs=1e-12)

    def test_low_noise_snaps_to_points(self, qpsk_prior):
        mean, var = qpsk_prior.denoise(qpsk_prior.points * 1.01, 1e-4)
        np.testing.assert_allclose(mean, qpsk_prior.points, atol=1e-12)
        assert var < 1e-12

    def test_gaussian_closed_form(self):
        mean, var = GaussianPrior().denoise(np.array([2.0 + 2.0j]), 1.0)
        assert mean[0] == pytest.approx(1.0 + 1.0j)
        assert var == pytest.approx(0.5)

    def test_rejects_nonpositive_variance(self, qpsk_prior):
        with pytest.raises(ValueError):
            qpsk_prior.denoise(np.zeros(2), 0.0)


class TestMmse:
    """Test mmse, its inverse and mutual information"""

    def test_zero_snr(self, qpsk_prior):
        assert qpsk_prior.mmse(0.0) == 1.0
        assert GaussianPrior().mmse(0.0) == 1.0

    def test_gaussian_values(self):
        """mmse(1) = 0.5 and mmse_inv(0.5) = 1"""
        prior = GaussianPrior()
        assert prior.mmse(1.0) == pytest.approx(0.5, abs=1e-15)
        assert prior.mmse_inv(0.5) == pytest.approx(1.0, abs=1e-15)

    def test_qpsk_below_gaussian(self, qpsk_prior):
        """Discrete symbols are easier to estimate than Gaussian ones"""
        rho = np.array([0.5, 2.0, 8.0])
        assert np.all(qpsk_prior.mmse(rho) < GaussianPrior().mmse(rho))

    def test_monotone(self, qpsk_prior):
        values = qpsk_prior.mmse(np.geomspace(1e-3, 1e3, 50))
        assert np.all(np.diff(values) <= 1e-15)

    @pytest.mark.parametrize("v", [0.9, 0.5, 0.1])
    def test_inverse_round_trip(self, qpsk_prior, v):
        """mmse(mmse_inv(v)) = v within 1e-9"""
        assert qpsk_prior.mmse(qpsk_prior.mmse_inv(v)) == pytest.approx(v, abs=1e-9)

    def test_inverse_at_one(self, qpsk_prior):
        assert qpsk_prior.mmse_inv(1.0) == 0.0

    def test_inverse_range(self, qpsk_prior):
        with pytest.raises(ValueError):
            qpsk_prior.mmse_inv(0.0)
        with pytest.raises(ValueError):
            qpsk_prior.mmse_inv(1.5)

    def test_table_tracks_exact(self, qpsk_prior):
        rho = np.array([0.01, 0.3, 3.0])
        table = qpsk_prior.scalar_functions.mmse(rho)
        np.testing.assert_allclose(table, qpsk_prior.mmse(rho), rtol=1e-3, atol=1e-12)

    def test_gaussian_capacity(self):
        assert GaussianPrior().mutual_information(1.0) == pytest.approx(np.log(2.0), abs=1e-15)

    def test_qpsk_capacity_saturates(self, qpsk_prior):
        """I(snr = 100) approaches log 4 nats"""
        assert qpsk_prior.mutual_information(100.0) == pytest.approx(np.log(4.0), abs=1e-2)

    def test_i_mmse_relation(self, qpsk_prior):
        """dI/drho = mmse(rho)"""
        rho, h = 1.5, 1e-4
        slope = (qpsk_prior.mutual_information(rho + h) - qpsk_prior.mutual_information(rho - h)) / (2 * h)
        assert slope == pytest.approx(qpsk_prior.mmse(rho), rel=1e-5)


class TestBitErrors:
    """Test MAP bit error rates and hard decisions"""

    def test_qpsk_zero_snr(self, qpsk_prior):
        assert qpsk_prior.map_ber(0.0) == 0.5

    def test_qpsk_q_function(self, qpsk_prior):
        """map_ber(4) = Q(2)"""
        assert qpsk_prior.map_ber(4.0) == pytest.approx(Q_OF_2, abs=1e-12)

    def test_16qam_decreasing(self):
        prior = qam16()
        values = prior.map_ber(np.array([1.0, 10.0, 100.0]))
        assert 0.0 < values[2] < values[1] < values[0] < 0.5

    @pytest.mark.slow
    @pytest.mark.parametrize("rho", [1.0, 4.0, 10.0])
    def test_16qam_matches_monte_carlo_demodulation(self, rho):
        """Per-bit MAP decisions on 10^6 noisy symbols agree within 3 standard errors"""
        prior = qam16()
        rng = np.random.default_rng(int(rho * 10))
        per_symbol = []
        for _ in range(10):
            s, bits = prior.sample(100_000, rng)
            noise = (rng.standard_normal(s.size) + 1j * rng.standard_normal(s.size)) / np.sqrt(2.0)
            r = np.sqrt(rho) * s + noise
            metric = -np.abs(r[:, None] - np.sqrt(rho) * prior.points[None, :]) ** 2
            decided = np.empty_like(bits)
            for k in range(bits.shape[1]):
                one = prior.bit_labels[:, k] == 1
                llr = logsumexp(metric[:, one], axis=1) - logsumexp(metric[:, ~one], axis=1)
                decided[:, k] = llr > 0.0
            per_symbol.append(np.mean(decided != bits, axis=1))
        per_symbol = np.concatenate(per_symbol)
        stderr = per_symbol.std() / np.sqrt(per_symbol.size)
        assert abs(prior.map_ber(rho) - per_symbol.mean()) <= 3.0 * stderr

    def test_gaussian_has_no_ber(self):
        with pytest.raises(ValueError):
            GaussianPrior().map_ber(1.0)

    def test_hard_decide_exact(self, qpsk_prior):
        s, bits = sample_symbols(qpsk_prior, 100, 5)
        np.testing.assert_array_equal(qpsk_prior.hard_decide(s), bits)

    def test_hard_decide_negated_flips_all_bits(self, qpsk_prior):
        """r = -s flips every QPSK bit"""
        s, bits = sample_symbols(qpsk_prior, 100, 6)
        np.testing.assert_array_equal(qpsk_prior.hard_decide(-s), 1 - bits)
