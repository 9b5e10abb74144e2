"""Modulators, cyclic prefix handling, and I/Q file round-trips."""

import numpy as np
import pytest

from gfdmlib import core, transmitter
from gfdmlib.errors import ParameterError, UnsupportedSizeError


def _setup(m, n, alpha=0.5, n_cp=0):
    params = core.GfdmParams(M=m, N=n, n_cp=n_cp)
    pulse = core.build_prototype_pulse("rc", params, rolloff=alpha)
    return params, pulse


class TestModulate:
    @pytest.mark.parametrize("m,n", [(2, 2), (4, 8), (8, 4), (16, 16)])
    def test_fast_equals_direct(self, m, n):
        params, pulse = _setup(m, n)
        diag = core.spectral_diagonal(pulse, params)
        mod = core.build_modmatrix_direct(pulse, params)
        rng = np.random.default_rng(0)
        d = rng.standard_normal((100, m * n)) + 1j * rng.standard_normal((100, m * n))
        fast = transmitter.modulate_fast(params, diag, d).x
        direct = transmitter.modulate_direct(mod, d).x
        scale = np.linalg.norm(direct, axis=-1)
        err = np.linalg.norm(fast - direct, axis=-1) / scale
        assert err.max() < 1e-10

    def test_fast_rejects_non_pow2(self):
        params, pulse = _setup(3, 5)
        diag = core.spectral_diagonal(pulse, params)
        with pytest.raises(UnsupportedSizeError):
            transmitter.modulate_fast(params, diag, np.zeros(15))

    def test_direct_rejects_wrong_length(self):
        params, pulse = _setup(4, 8)
        mod = core.build_modmatrix_direct(pulse, params)
        with pytest.raises(ParameterError):
            transmitter.modulate_direct(mod, np.zeros(31))

    def test_datagrid_accepted(self):
        params, pulse = _setup(4, 8)
        mod = core.build_modmatrix_direct(pulse, params)
        d = np.arange(32, dtype=complex)
        via_grid = transmitter.modulate_direct(mod, core.DataGrid(d=d)).x
        via_array = transmitter.modulate_direct(mod, d).x
        assert np.array_equal(via_grid, via_array)


class TestCyclicPrefix:
    def test_prefix_is_tail_copy(self):
        sig = transmitter.BasebandSignal(x=np.arange(8, dtype=complex))
        out = transmitter.add_cp(sig, 3)
        assert out.has_cp and out.n_cp == 3
        assert np.array_equal(out.x[:3], sig.x[-3:])
        assert np.array_equal(out.x[3:], sig.x)

    def test_uses_params_default(self):
        sig = transmitter.BasebandSignal(x=np.arange(8, dtype=complex), n_cp=2)
        assert transmitter.add_cp(sig).x.shape == (10,)

    def test_zero_length_prefix(self):
        sig = transmitter.BasebandSignal(x=np.arange(8, dtype=complex))
        out = transmitter.add_cp(sig, 0)
        assert out.has_cp and out.x.shape == (8,)

    def test_double_prefix_rejected(self):
        sig = transmitter.add_cp(
            transmitter.BasebandSignal(x=np.arange(8, dtype=complex)), 2)
        with pytest.raises(ParameterError):
            transmitter.add_cp(sig, 2)

    def test_bounds(self):
        sig = transmitter.BasebandSignal(x=np.arange(8, dtype=complex))
        with pytest.raises(ParameterError):
            transmitter.add_cp(sig, 9)
        with pytest.raises(ParameterError):
            transmitter.add_cp(sig, -1)

    def test_batched(self):
        x = np.arange(24, dtype=complex).reshape(3, 8)
        out = transmitter.add_cp(transmitter.BasebandSignal(x=x), 2)
        assert out.x.shape == (3, 10)
        assert np.array_equal(out.x[:, :2], x[:, -2:])


class TestIqFiles:
    @pytest.mark.parametrize("fmt", ["bin", "csv"])
    def test_roundtrip(self, tmp_path, fmt):
        params, pulse = _setup(4, 8, n_cp=5)
        rng = np.random.default_rng(4)
        x = rng.standard_normal(37) + 1j * rng.standard_normal(37)
        sig = transmitter.BasebandSignal(x=x, has_cp=True, n_cp=5)
        path = tmp_path / f"sig.{fmt}"
        transmitter.save_iq(path, sig, params, pulse, fmt=fmt)
        back, back_params, spec = transmitter.load_iq(path)
        assert np.array_equal(back.x, x)
        assert back.has_cp and back.n_cp == 5
        assert (back_params.M, back_params.N) == (4, 8)
        assert spec["pulse"] == "rc"
        assert float(spec["rolloff"]) == 0.5

    def test_bad_format_rejected(self, tmp_path):
        params, pulse = _setup(4, 8)
        sig = transmitter.BasebandSignal(x=np.zeros(32, dtype=complex))
        with pytest.raises(ParameterError):
            transmitter.save_iq(tmp_path / "sig", sig, params, pulse, fmt="wav")

    def test_truncated_payload_detected(self, tmp_path):
        params, pulse = _setup(4, 8)
        sig = transmitter.BasebandSignal(x=np.zeros(32, dtype=complex))
        path = tmp_path / "sig.bin"
        transmitter.save_iq(path, sig, params, pulse)
        data = path.read_bytes()
        path.write_bytes(data[:-16])
        with pytest.raises(ParameterError):
            transmitter.load_iq(path)
