"""Multipath profiles, tap drawing, convolution plus noise, CP stripping."""

import numpy as np
import pytest

from gfdmlib import channel, core, transmitter
from gfdmlib.errors import ConfigurationError, ParameterError


class TestProfiles:
    def test_etu_values(self):
        p = channel.etu()
        assert p.delays_ns == (0, 50, 120, 200, 230, 500, 1600, 2300, 5000)
        assert p.powers_db == (-1, -1, -1, 0, 0, 0, -3, -5, -7)

    def test_etu_bins_at_lte_rate(self):
        bins = channel.profile_tap_bins(channel.etu(), 1.92e6)
        assert list(bins) == [0, 0, 0, 0, 0, 1, 3, 4, 10]

    def test_awgn_profile_single_tap(self):
        p = channel.awgn_profile()
        assert channel.profile_tap_bins(p, 1.92e6).tolist() == [0]

    def test_validation(self):
        with pytest.raises(ParameterError):
            channel.ChannelProfile(delays_ns=(0, 10), powers_db=(0.0,))
        with pytest.raises(ParameterError):
            channel.ChannelProfile(delays_ns=(10, 0), powers_db=(0.0, 0.0))
        with pytest.raises(ParameterError):
            channel.ChannelProfile(delays_ns=(-5, 0), powers_db=(0.0, 0.0))

    def test_load_profile(self, tmp_path):
        path = tmp_path / "prof.txt"
        path.write_text("# two taps\ndelays_ns = [0, 100]\npowers_db = [0, -3]\n")
        p = channel.load_profile(path)
        assert p.delays_ns == (0, 100)
        assert p.powers_db == (0, -3)

    def test_load_profile_bare_lists(self, tmp_path):
        path = tmp_path / "prof.txt"
        path.write_text("delays_ns = 0, 100, 230\npowers_db = 0 -3 -6\n")
        p = channel.load_profile(path)
        assert p.delays_ns == (0, 100, 230)


class TestDrawChannel:
    def test_span_and_power(self):
        params = core.GfdmParams(M=8, N=128, n_cp=16)
        rng = np.random.default_rng(0)
        total = 0.0
        draws = 400
        for _ in range(draws):
            real = channel.draw_channel(channel.etu(), 1.92e6, rng, params)
            assert real.L == 11
            assert real.h.shape == (11,)
            assert real.Lambda.shape == (params.block_len,)
            total += np.sum(np.abs(real.h) ** 2)
        # linear powers are normalized to sum to 1 before drawing
        assert abs(total / draws - 1.0) < 0.1

    def test_cp_must_cover_delay_spread(self):
        params = core.GfdmParams(M=8, N=128, n_cp=4)
        with pytest.raises(ConfigurationError):
            channel.draw_channel(channel.etu(), 1.92e6, np.random.default_rng(0),
                                 params)

    def test_identity_channel(self):
        params = core.GfdmParams(M=4, N=8)
        real = channel.identity_channel(params)
        assert np.array_equal(real.h, [1.0])
        assert np.allclose(real.Lambda, np.ones(32))

    def test_freq_coeffs_definition(self):
        h = np.array([1.0, 0.5j, -0.25])
        lam = channel.channel_freq_coeffs(h, 16)
        r = np.arange(16)
        ref = sum(h[s] * np.exp(-2j * np.pi * s * r / 16) for s in range(3))
        assert np.allclose(lam, ref, atol=1e-12)

    def test_freq_coeffs_reject_long_h(self):
        with pytest.raises(ParameterError):
            channel.channel_freq_coeffs(np.ones(17), 16)


class TestApplyChannel:
    def test_cp_makes_convolution_circular(self):
        """After CP add, channel, CP strip: y == circular_conv(x, h)."""
        params = core.GfdmParams(M=4, N=8, n_cp=6)
        rng = np.random.default_rng(1)
        x = rng.standard_normal(32) + 1j * rng.standard_normal(32)
        h = np.array([0.9, 0.3 - 0.2j, 0.0, 0.1j])
        sig = transmitter.add_cp(transmitter.BasebandSignal(x=x, n_cp=6))
        y = channel.apply_channel(sig, h, 0.0, rng)
        got = channel.remove_cp(y, params, len(h))
        ref = np.fft.ifft(np.fft.fft(x) * np.fft.fft(h, 32))
        assert np.max(np.abs(got - ref)) < 1e-12

    def test_noise_variance(self):
        params = core.GfdmParams(M=4, N=8, n_cp=0)
        rng = np.random.default_rng(2)
        x = np.zeros((2000, 32), dtype=complex)
        sig = transmitter.BasebandSignal(x=x, has_cp=True, n_cp=0)
        y = channel.apply_channel(sig, np.ones(1), 0.5, rng)
        measured = np.mean(np.abs(y) ** 2)
        assert abs(measured - 0.5) < 0.01

    def test_noiseless_is_exact(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal(10) + 0j
        sig = transmitter.BasebandSignal(x=x, has_cp=True, n_cp=0)
        y = channel.apply_channel(sig, np.array([1.0]), 0.0, rng)
        assert np.array_equal(y, x)

    def test_requires_cp_flag(self):
        sig = transmitter.BasebandSignal(x=np.zeros(8, dtype=complex))
        with pytest.raises(ParameterError):
            channel.apply_channel(sig, np.ones(1), 0.0, np.random.default_rng(0))

    def test_negative_noise_rejected(self):
        sig = transmitter.BasebandSignal(x=np.zeros(8, dtype=complex),
                                         has_cp=True, n_cp=0)
        with pytest.raises(ParameterError):
            channel.apply_channel(sig, np.ones(1), -1.0, np.random.default_rng(0))

    def test_output_length(self):
        sig = transmitter.BasebandSignal(x=np.zeros((3, 38), dtype=complex),
                                         has_cp=True, n_cp=6)
        y = channel.apply_channel(sig, np.ones(4), 0.0, np.random.default_rng(0))
        assert y.shape == (3, 41)


class TestRemoveCp:
    def test_window(self):
        params = core.GfdmParams(M=4, N=8, n_cp=6)
        z = np.arange(6 + 32 + 3, dtype=complex)
        out = channel.remove_cp(z, params, 4)
        assert np.array_equal(out, np.arange(6, 38))

    def test_length_validated(self):
        params = core.GfdmParams(M=4, N=8, n_cp=6)
        with pytest.raises(ParameterError):
            channel.remove_cp(np.zeros(40), params, 4)
