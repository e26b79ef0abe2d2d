"""
Tests for sparse doubly-selective channels, spectral summaries and the triplet format
"""
import numpy as np
import pytest
from pydantic import ValidationError
from scipy import sparse

from channel import (
    ChannelMatrix,
    ChannelSpec,
    MimoSpec,
    SpectralSummary,
    dump_channel,
    generate_channel,
    identity_channel,
    load_channel,
    rrc_taps,
    spectral_ks_distance,
    spectral_summary,
)
from utils.errors import ConfigError, DimensionError


class TestGenerateChannel:
    """Test channel draws"""

    def test_single_static_path_is_scaled_identity(self):
        """One path, no delay, no Doppler, sinc pulse: A = c I with |c| = 1"""
        spec = ChannelSpec(n=16, paths=1, max_delay_taps=0, doppler_max_hz=0.0, rrc_rolloff=0.0, seed=4)
        a = generate_channel(spec).matrix.toarray()
        c = a[0, 0]
        assert abs(abs(c) - 1.0) < 1e-12
        np.testing.assert_allclose(a, c * np.eye(16), atol=1e-12)

    def test_energy_normalized(self, small_channel_spec):
        """(1/N) tr(A^H A) = 1 within 1e-12"""
        channel = generate_channel(small_channel_spec)
        assert channel.trace_gram / channel.n == pytest.approx(1.0, abs=1e-12)

    def test_row_sparsity(self, small_channel_spec):
        """Rows carry at most paths x rrc_taps nonzeros"""
        channel = generate_channel(small_channel_spec)
        assert channel.max_row_nonzeros <= small_channel_spec.paths * small_channel_spec.rrc_taps

    def test_adjoint_consistency(self, small_channel_spec, rng):
        """<A x, r> = <x, A^H r>"""
        channel = generate_channel(small_channel_spec)
        x = rng.standard_normal(channel.n) + 1j * rng.standard_normal(channel.n)
        r = rng.standard_normal(channel.m) + 1j * rng.standard_normal(channel.m)
        assert abs(np.vdot(r, channel.apply(x)) - np.vdot(channel.adjoint(r), x)) < 1e-10

    def test_deterministic_per_seed(self, small_channel_spec):
        first = generate_channel(small_channel_spec).matrix
        second = generate_channel(small_channel_spec).matrix
        assert (first != second).nnz == 0

    def test_tall_channel_shape(self, small_channel_spec):
        channel = generate_channel(small_channel_spec.model_copy(update={"delta": 2.0}))
        assert (channel.m, channel.n) == (256, 128)
        assert channel.spectral.lambda_min == 0.0

    def test_mimo_divisibility(self):
        """N must split evenly over the transmit antennas"""
        with pytest.raises(ValidationError):
            ChannelSpec(n=6, paths=1, max_delay_taps=0, mimo=MimoSpec(tx=4, rx=4))
        resized = ChannelSpec(n=8, paths=1, max_delay_taps=0, mimo=MimoSpec(tx=4, rx=4)).model_copy(update={"n": 6})
        with pytest.raises(ConfigError):
            generate_channel(resized)

    def test_delay_spread_must_fit_antenna_block(self):
        """max_delay_taps must stay below N / tx"""
        with pytest.raises(ValidationError):
            ChannelSpec(n=16, paths=2, max_delay_taps=4, mimo=MimoSpec(tx=4, rx=4))
        spec = ChannelSpec(n=32, paths=2, max_delay_taps=4, mimo=MimoSpec(tx=4, rx=4))
        assert spec.dimension_problem() is None

    def test_mimo_channel_energy(self):
        spec = ChannelSpec(n=64, delta=2.0, paths=3, max_delay_taps=4,
                           mimo=MimoSpec(tx=4, rx=8, correlation=0.3), seed=2)
        channel = generate_channel(spec)
        assert (channel.m, channel.n) == (128, 64)
        assert channel.trace_gram / channel.n == pytest.approx(1.0, abs=1e-12)

    def test_too_many_paths(self):
        """paths cannot exceed the available delay taps"""
        with pytest.raises(ValidationError):
            ChannelSpec(n=16, paths=4, max_delay_taps=2)

    def test_rrc_taps_unit_energy(self):
        _, weights = rrc_taps(0.4)
        assert np.linalg.norm(weights) == pytest.approx(1.0, abs=1e-14)


class TestSpectralSummary:
    """Test extremal eigenvalues and lambda_dagger"""

    def test_diagonal_example(self):
        """diag(2, 1): lambda_max 4, lambda_min 1, lambda_dagger 2.5"""
        summary = spectral_summary(sparse.diags([2.0, 1.0]))
        assert summary.lambda_max == pytest.approx(4.0, abs=1e-12)
        assert summary.lambda_min == pytest.approx(1.0, abs=1e-12)
        assert summary.lambda_dagger == pytest.approx(2.5, abs=1e-12)

    def test_lanczos_matches_dense(self, small_channel_spec):
        """Above the dense limit the extremal eigenvalues come from Lanczos"""
        dense = generate_channel(small_channel_spec).spectral
        lanczos = generate_channel(small_channel_spec, dense_limit=0).spectral
        assert lanczos.singular_values is None
        assert lanczos.lambda_max == pytest.approx(dense.lambda_max, rel=1e-8)
        assert lanczos.lambda_min == pytest.approx(dense.lambda_min, abs=1e-6)

    def test_padded_singular_values(self):
        summary = SpectralSummary(0.0, 4.0, np.array([2.0, 1.0]))
        np.testing.assert_array_equal(summary.padded_singular_values(4), [2.0, 1.0, 0.0, 0.0])

    def test_ks_distance_self_is_zero(self, small_channel_spec):
        summary = generate_channel(small_channel_spec).spectral
        assert spectral_ks_distance(summary, summary) == 0.0


class TestFromDiagonal:
    """Test diagonal channels"""

    def test_identity_channel(self):
        channel = identity_channel(32)
        assert channel.spectral.lambda_dagger == 1.0
        assert channel.trace_gram == pytest.approx(32.0)
        np.testing.assert_array_equal(channel.apply(np.arange(32)), np.arange(32))

    def test_zero_amplitudes(self):
        """Zero entries drop out of the sparse pattern and the spectrum floor is 0"""
        channel = ChannelMatrix.from_diagonal([3.0, 0.0, 1.0])
        assert channel.matrix.nnz == 2
        assert channel.spectral.lambda_min == 0.0
        assert channel.spectral.lambda_max == pytest.approx(9.0)
        np.testing.assert_array_equal(channel.spectral.singular_values, [3.0, 1.0, 0.0])

    def test_rejects_matrix(self):
        with pytest.raises(DimensionError):
            ChannelMatrix.from_diagonal(np.ones((2, 2)))


class TestTriplets:
    """Test the sparse-triplet text format"""

    def test_round_trip(self, small_channel_spec, tmp_path):
        """17 significant digits reproduce every entry exactly"""
        channel = generate_channel(small_channel_spec)
        path = dump_channel(channel, tmp_path / "channel.txt")
        loaded = load_channel(path)
        assert (loaded.m, loaded.n) == (channel.m, channel.n)
        assert abs(loaded.matrix - channel.matrix).max() == 0.0

    def test_header(self, tmp_path):
        path = dump_channel(identity_channel(4), tmp_path / "eye.txt")
        assert path.read_text().splitlines()[0] == "# rows 4 cols 4"
