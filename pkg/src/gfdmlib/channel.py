"""Tapped-delay-line multipath model: tap draws, application, CP removal.

Profiles carry nanosecond delays and per-path dB powers; draw_channel
quantizes delays onto the sample grid and hands back an independent ZMCSC
realization per call. The frequency diagonal uses the forward (negative
exponent) unnormalized DFT so that W diag(Lambda) W^H reconstructs the
circulant matrix of h, W being the MN-point normalized IDFT.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass

import numpy as np

from .core import GfdmParams
from .errors import ConfigurationError, ParameterError
from .transmitter import BasebandSignal

#: 3GPP Extended Typical Urban power-delay profile.
ETU_DELAYS_NS = (0.0, 50.0, 120.0, 200.0, 230.0, 500.0, 1600.0, 2300.0, 5000.0)
ETU_POWERS_DB = (-1.0, -1.0, -1.0, 0.0, 0.0, 0.0, -3.0, -5.0, -7.0)


@dataclass(frozen=True)
class ChannelProfile:
    delays_ns: tuple
    powers_db: tuple
    name: str = "custom"

    def __post_init__(self):
        d = tuple(float(v) for v in self.delays_ns)
        p = tuple(float(v) for v in self.powers_db)
        if len(d) != len(p):
            raise ParameterError(
                f"profile has {len(d)} delays but {len(p)} powers")
        if not d:
            raise ParameterError("profile needs at least one path")
        if d[0] < 0 or any(b <= a for a, b in zip(d, d[1:])):
            raise ParameterError(
                "delays must be nonnegative and strictly increasing")
        object.__setattr__(self, "delays_ns", d)
        object.__setattr__(self, "powers_db", p)


def etu() -> ChannelProfile:
    return ChannelProfile(delays_ns=ETU_DELAYS_NS, powers_db=ETU_POWERS_DB,
                          name="ETU")


def awgn_profile() -> ChannelProfile:
    """Single zero-delay unit-power path; the identity channel statistics."""
    return ChannelProfile(delays_ns=(0.0,), powers_db=(0.0,), name="AWGN")


def load_profile(path) -> ChannelProfile:
    """Key-value text file with `delays_ns = ...` and `powers_db = ...` lines.

    Values may be bracketed lists or bare comma/space separated numbers.
    """
    fields = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise ParameterError(f"bad profile line {line!r}")
            fields[key.strip()] = _parse_number_list(val.strip())
    if "delays_ns" not in fields or "powers_db" not in fields:
        raise ParameterError(
            f"profile file {path} must define delays_ns and powers_db")
    name = "custom"
    return ChannelProfile(delays_ns=tuple(fields["delays_ns"]),
                          powers_db=tuple(fields["powers_db"]), name=name)


def _parse_number_list(text: str) -> list:
    if text.startswith("["):
        parsed = ast.literal_eval(text)
        return [float(v) for v in parsed]
    return [float(tok) for tok in text.replace(",", " ").split()]


@dataclass(frozen=True)
class ChannelRealization:
    """Sample-spaced impulse response plus its MN-point frequency diagonal."""

    h: np.ndarray
    Lambda: np.ndarray
    L: int


def profile_tap_bins(profile: ChannelProfile, fs: float) -> np.ndarray:
    """Sample-grid bin of every path: round(delay * fs)."""
    if fs <= 0:
        raise ParameterError(f"sampling rate must be positive, got {fs}")
    return np.rint(np.asarray(profile.delays_ns) * 1e-9 * fs).astype(int)


def draw_channel(profile: ChannelProfile, fs: float, rng: np.random.Generator,
                 params: GfdmParams) -> ChannelRealization:
    """One quasi-static ZMCSC realization on the sample grid.

    Per-path variances are the linear powers normalized to sum to 1; paths
    quantized into the same bin simply add (they stay independent draws, so
    the bin's variance is the power sum either way).
    """
    bins = profile_tap_bins(profile, fs)
    linear = 10.0 ** (np.asarray(profile.powers_db) / 10.0)
    linear = linear / linear.sum()
    length = int(bins.max()) + 1
    if params.n_cp < length:
        raise ConfigurationError(
            f"channel spans L={length} samples but n_cp={params.n_cp}; "
            "the cyclic prefix must cover the delay spread")
    scale = np.sqrt(linear / 2.0)
    paths = scale * (rng.standard_normal(len(bins))
                     + 1j * rng.standard_normal(len(bins)))
    h = np.zeros(length, dtype=complex)
    np.add.at(h, bins, paths)
    return ChannelRealization(h=h, Lambda=channel_freq_coeffs(h, params.block_len),
                              L=length)


def identity_channel(params: GfdmParams) -> ChannelRealization:
    """h = [1]; what AWGN-only simulations run through."""
    h = np.ones(1, dtype=complex)
    return ChannelRealization(h=h, Lambda=channel_freq_coeffs(h, params.block_len),
                              L=1)


def channel_freq_coeffs(h, block_len: int) -> np.ndarray:
    """Lambda[r] = sum_s h[s] exp(-j 2 pi s r / MN) (unnormalized DFT)."""
    h = np.asarray(h)
    if h.shape[-1] > block_len:
        raise ParameterError(
            f"impulse response length {h.shape[-1]} exceeds block length {block_len}")
    return np.fft.fft(h, n=block_len, axis=-1)


def apply_channel(sig: BasebandSignal, h, sigma_nu2: float,
                  rng: np.random.Generator) -> np.ndarray:
    """Linear convolution with h plus complex AWGN of variance sigma_nu2.

    Accepts batches: sig.x of shape (..., n_cp+MN) gives (..., n_cp+MN+L-1).
    The shifted-add form keeps the batch axis intact, which np.convolve
    would not.
    """
    if not sig.has_cp:
        raise ParameterError("apply_channel expects a CP-bearing signal")
    x = np.asarray(sig.x)
    h = np.asarray(h).ravel()
    ell = h.shape[0]
    out_len = x.shape[-1] + ell - 1
    y = np.zeros(x.shape[:-1] + (out_len,), dtype=complex)
    for s in range(ell):
        y[..., s:s + x.shape[-1]] += h[s] * x
    if sigma_nu2 < 0:
        raise ParameterError(f"noise variance must be >= 0, got {sigma_nu2}")
    if sigma_nu2 > 0:
        sd = np.sqrt(sigma_nu2 / 2.0)
        y += sd * (rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape))
    return y


def remove_cp(z, params: GfdmParams, ell: int) -> np.ndarray:
    """Keep samples [n_cp, n_cp + MN) of the received sequence."""
    z = np.asarray(z)
    mn = params.block_len
    expected = params.n_cp + mn + ell - 1
    if z.shape[-1] != expected:
        raise ParameterError(
            f"expected received length {expected} (n_cp + MN + L - 1), "
            f"got {z.shape[-1]}")
    return z[..., params.n_cp:params.n_cp + mn]
