"""Two-stage receiver: per-bin channel FDE, then self-interference removal.

The self-interference stage inverts the modulation matrix through its
spectral diagonal: the equalizer for every kind is the same unitary sandwich
with a different pointwise diagonal d_eq, so MF/ZF/MMSE all cost the same
and their conditioning is read straight off d_eq. Dense constructions are
kept as oracles.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import (
    GfdmParams,
    ModulationMatrix,
    dft_per_slot,
    dft_per_subcarrier,
    idft_per_subcarrier,
    permute_forward,
    permute_inverse,
)
from .errors import (
    ParameterError,
    SingularChannelError,
    SingularPulseError,
    UnsupportedSizeError,
)

#: Relative modulus floor under which a diagonal is treated as singular.
SINGULARITY_RTOL = 1e-12


class EqualizerKind(enum.Enum):
    MF = "mf"
    ZF = "zf"
    MMSE_BIASED = "mmse_biased"
    MMSE_UNBIASED = "mmse_unbiased"


class FdeKind(enum.Enum):
    ZF = "zf"
    MMSE = "mmse"


@dataclass(frozen=True)
class EqualizerFactors:
    """Diagonal + bias defining one self-interference equalizer."""

    d_eq: np.ndarray
    bias: float
    kind: EqualizerKind
    snr_ratio: float


@dataclass(frozen=True)
class EqualizedGrid:
    """Soft symbol estimates, slot-major like DataGrid."""

    d_hat: np.ndarray


def _singular_bin(diag: np.ndarray) -> int | None:
    """Index of the first entry below the relative floor, or None."""
    mags = np.abs(diag)
    ref = mags.max()
    if ref == 0.0:
        return 0
    idx = int(np.argmin(mags))
    if mags[idx] < SINGULARITY_RTOL * ref:
        return idx
    return None


# ---------------------------------------------------------------------------
# stage one: frequency-domain channel equalization


def fde_equalize(z, Lambda, kind: FdeKind, snr_ratio: float = 0.0) -> np.ndarray:
    """y = W . Lambda_eq . W^H . z, pointwise in the MN-point DFT domain.

    Lambda_eq = 1/Lambda for ZF, conj(Lambda)/(|Lambda|^2 + ratio) for MMSE.
    Accepts (..., MN) batches.
    """
    z = np.asarray(z)
    Lambda = np.asarray(Lambda)
    if Lambda.shape[-1] != z.shape[-1]:
        raise ParameterError(
            f"Lambda length {Lambda.shape[-1]} != block length {z.shape[-1]}")
    kind = FdeKind(kind)
    if kind is FdeKind.ZF:
        bad = _singular_bin(Lambda)
        if bad is not None:
            raise SingularChannelError(
                f"channel frequency bin {bad} is (near) zero; ZF FDE undefined",
                bin_index=bad)
        lam_eq = 1.0 / Lambda
    else:
        if snr_ratio < 0:
            raise ParameterError(f"snr_ratio must be >= 0, got {snr_ratio}")
        lam_eq = np.conj(Lambda) / (np.abs(Lambda) ** 2 + snr_ratio)
    spec = np.fft.fft(z, axis=-1, norm="ortho")
    return np.fft.ifft(lam_eq * spec, axis=-1, norm="ortho")


# ---------------------------------------------------------------------------
# stage two: self-interference equalization


def bias_scalar(lam, snr_ratio: float) -> float:
    """B = (1/MN) sum_r |lam_r|^2 / (|lam_r|^2 + ratio)."""
    if snr_ratio < 0:
        raise ParameterError(f"snr_ratio must be >= 0, got {snr_ratio}")
    mags2 = np.abs(np.asarray(lam)) ** 2
    return float(np.mean(mags2 / (mags2 + snr_ratio)))


def build_deq(lam_bar, kind: EqualizerKind, snr_ratio: float = 0.0) -> EqualizerFactors:
    """Pointwise equalizer diagonal for the given kind.

    MF conjugates, ZF inverts, the MMSE pair regularizes; the unbiased MMSE
    additionally divides the estimates by the bias scalar downstream.
    """
    lam_bar = np.asarray(lam_bar)
    kind = EqualizerKind(kind)
    if snr_ratio < 0:
        raise ParameterError(f"snr_ratio must be >= 0, got {snr_ratio}")
    if kind is EqualizerKind.MF:
        d_eq = np.conj(lam_bar)
    elif kind is EqualizerKind.ZF:
        bad = _singular_bin(lam_bar)
        if bad is not None:
            raise SingularPulseError(
                f"spectral diagonal entry {bad} is (near) zero; the pulse "
                "gives a singular modulation matrix and ZF is undefined",
                bin_index=bad)
        d_eq = 1.0 / lam_bar
    else:
        denom = np.abs(lam_bar) ** 2 + snr_ratio
        if snr_ratio == 0.0:
            bad = _singular_bin(lam_bar)
            if bad is not None:
                raise SingularPulseError(
                    f"spectral diagonal entry {bad} is (near) zero and "
                    "snr_ratio is 0; the MMSE diagonal degenerates",
                    bin_index=bad)
        d_eq = np.conj(lam_bar) / denom
    bias = 1.0
    if kind is EqualizerKind.MMSE_UNBIASED:
        # B is invariant to the shuffle, so lam_bar serves directly.
        bias = bias_scalar(lam_bar, snr_ratio)
    return EqualizerFactors(d_eq=d_eq, bias=bias, kind=kind, snr_ratio=snr_ratio)


def equalize_fast(y, factors: EqualizerFactors, params: GfdmParams) -> EqualizedGrid:
    """Factored receive pipeline, power-of-two M and N only.

    In order: forward shuffle, per-subcarrier DFTs, pointwise d_eq,
    per-subcarrier IDFTs, inverse shuffle, per-slot DFTs, bias division.
    """
    if not params.fast_path_ok():
        raise UnsupportedSizeError(
            f"fast path needs power-of-two M and N, got M={params.M}, N={params.N}")
    x = permute_forward(np.asarray(y), params)
    x = dft_per_subcarrier(x, params)
    x = x * factors.d_eq
    x = idft_per_subcarrier(x, params)
    x = permute_inverse(x, params)
    x = dft_per_slot(x, params)
    if factors.bias != 1.0:
        x = x / factors.bias
    return EqualizedGrid(d_hat=x)


def build_equalizer_direct(a: ModulationMatrix, kind: EqualizerKind,
                           snr_ratio: float = 0.0) -> np.ndarray:
    """Dense MN x MN equalizer matrix; the oracle the fast path is tested
    against. ZF refuses matrices whose smallest singular value is negligible.
    """
    kind = EqualizerKind(kind)
    mat = np.asarray(a.a)
    mn = mat.shape[0]
    if kind is EqualizerKind.MF:
        return mat.conj().T.copy()
    if kind is EqualizerKind.ZF:
        sv = np.linalg.svd(mat, compute_uv=False)
        if sv[-1] < SINGULARITY_RTOL * sv[0]:
            raise SingularPulseError(
                "modulation matrix is singular; ZF is undefined")
        return np.linalg.inv(mat)
    gram = mat.conj().T @ mat
    mmse = np.linalg.solve(snr_ratio * np.eye(mn) + gram, mat.conj().T)
    if kind is EqualizerKind.MMSE_BIASED:
        return mmse
    scaling = np.diag(np.linalg.solve(snr_ratio * np.eye(mn) + gram, gram))
    return mmse / scaling[:, None]


def condition_number(lam_bar, kind, snr_ratio: float = 0.0) -> float:
    """kappa of the equalizer matrix, read off the diagonal.

    The equalizer is diag(d_eq) conjugated by unitaries and scaled by a
    positive scalar, so its singular values are |d_eq| up to that scale and
    kappa = max|d_eq| / min|d_eq|. `kind` may be an EqualizerKind or a
    prebuilt EqualizerFactors (whose diagonal is then used as is).
    """
    if isinstance(kind, EqualizerFactors):
        factors = kind
    else:
        factors = build_deq(lam_bar, kind, snr_ratio)
    mags = np.abs(factors.d_eq)
    lo = mags.min()
    if lo == 0.0:
        raise SingularPulseError(
            "equalizer diagonal has a zero entry; condition number undefined",
            bin_index=int(np.argmin(mags)))
    return float(mags.max() / lo)
