"""Block geometry, prototype pulses, and the modulation-matrix factorization.

Conventions used throughout the library:

* A GFDM block carries M time slots by N subcarriers. Vectors of length MN
  are time-slot-major: entry m*N + k belongs to slot m, subcarrier k.
* W_X denotes the X-point *normalized* IDFT, so W_X and its conjugate
  transpose are unitary. numpy's ``norm="ortho"`` transforms implement
  exactly these.
* The modulation matrix has columns

      A[n, m*N + k] = (1/sqrt(N)) * g[(n - m*N) mod MN] * exp(j*2*pi*k*n/N)

  so that with pulses normalized to sum(|g|^2) = N every column has unit
  energy. The factored form is

      A = P^T . (I_N x W_M) . diag(lambda_bar) . (I_N x W_M)^H . P . (I_M x W_N)

  where P is the perfect-shuffle permutation mapping slot-major to
  subcarrier-major ordering and lambda_bar is the shuffled spectral
  diagonal of the pulse. Both constructions are built here and must agree;
  the dense one is the oracle for everything fast.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, ParameterError

#: Largest MN for which dense MN x MN matrices may be materialized by default.
DEFAULT_ORACLE_CAP = 4096

PULSE_FAMILIES = ("rc", "rect_td", "rect_full")


@dataclass(frozen=True)
class GfdmParams:
    """Block geometry plus the two variances the receivers need.

    M: time slots per block. N: subcarriers. n_cp: cyclic prefix length in
    samples. sigma_d2 / sigma_nu2: data-symbol and per-sample noise variance
    (dimensionless powers; their ratio is what equalizers consume).
    """

    M: int
    N: int
    n_cp: int = 0
    sigma_d2: float = 1.0
    sigma_nu2: float = 0.0

    def __post_init__(self):
        if self.M < 1 or self.N < 1:
            raise ParameterError(f"M and N must be >= 1, got M={self.M}, N={self.N}")
        if self.n_cp < 0:
            raise ParameterError(f"n_cp must be >= 0, got {self.n_cp}")
        if self.sigma_d2 <= 0:
            raise ParameterError(f"sigma_d2 must be > 0, got {self.sigma_d2}")
        if self.sigma_nu2 < 0:
            raise ParameterError(f"sigma_nu2 must be >= 0, got {self.sigma_nu2}")

    @property
    def block_len(self) -> int:
        return self.M * self.N

    @property
    def snr_ratio(self) -> float:
        """sigma_nu^2 / sigma_d^2, the regularizer used by MMSE stages."""
        return self.sigma_nu2 / self.sigma_d2

    def fast_path_ok(self) -> bool:
        return _is_pow2(self.M) and _is_pow2(self.N)


def _is_pow2(x: int) -> bool:
    return x >= 1 and (x & (x - 1)) == 0


@dataclass(frozen=True)
class PrototypeFilter:
    """An MN-length pulse plus the spec it was built from.

    ``g`` always satisfies sum(|g|^2) == N (unit-energy columns of A).
    """

    g: np.ndarray
    family: str
    rolloff: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "g", np.asarray(self.g))


@dataclass(frozen=True)
class SpectralDiagonal:
    """The pulse's spectral diagonal in both orderings.

    lam[r] is the M-point DFT of the r-mod-N'th polyphase column of g,
    evaluated at frequency floor(r/N). lam_bar is lam re-indexed by the
    forward shuffle; it is the diagonal the factored pipelines multiply by.
    """

    lam: np.ndarray
    lam_bar: np.ndarray


@dataclass(frozen=True)
class DataGrid:
    """MN data symbols, slot-major (d_m[k] at index m*N + k)."""

    d: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "d", np.asarray(self.d))


@dataclass(frozen=True)
class ModulationMatrix:
    """Dense MN x MN modulation matrix. Oracle path only; memory-capped."""

    a: np.ndarray
    params: GfdmParams = field(repr=False)


# ---------------------------------------------------------------------------
# prototype pulses


def build_prototype_pulse(family: str, params: GfdmParams,
                          rolloff: float | None = None) -> PrototypeFilter:
    """Construct one of the built-in pulse families.

    "rc": circular raised cosine defined on the MN-point DFT grid. The
    amplitude taper is 1 for |f| below (1-a)/2 subcarrier spacings and rolls
    off as a raised cosine to zero at (1+a)/2. For odd M the taper is sampled
    symmetrically (bin q at q/M spacings) and the pulse comes out real and
    circularly even. For even M that symmetric sampling is unusable: any
    real, circularly even pulse has an exact spectral-diagonal zero at
    (frequency M/2, column N/2) whenever N is also even, because the taper
    pair straddling each crossover sums with opposite signs there. So for
    even M the taper is sampled half a bin off-grid, at (q + 1/2)/M, which
    keeps the crossover between bins; the pulse is then complex (a real,
    even envelope times a fixed half-bin phase ramp) and the modulation
    matrix stays invertible for every roll-off, becoming exactly unitary as
    the roll-off approaches zero. Either way the pulse is scaled so
    sum(|g|^2) = N.

    "rect_td": one rectangular time slot, g[n] = 1 for n < N else 0. Already
    normalized; makes A the block-diagonal of IDFTs (the OFDM-equivalent
    configuration).

    "rect_full": all-ones pulse scaled by 1/sqrt(M). The classic singular
    configuration; kept so singularity handling can be exercised.
    """
    m, n = params.M, params.N
    mn = m * n
    if family == "rc":
        if rolloff is None:
            raise ParameterError("rc pulse requires a roll-off factor")
        if not 0.0 <= rolloff <= 1.0:
            raise ParameterError(f"roll-off must lie in [0, 1], got {rolloff}")
        bins = _signed_bins(mn)
        if m % 2 == 0:
            bins = bins + 0.5
        spectrum = _rc_amplitude(bins / m, rolloff)
        g = np.fft.ifft(spectrum)
        if m % 2 == 1:
            g = g.real
        g = g * np.sqrt(n / np.sum(np.abs(g) ** 2))
        return PrototypeFilter(g=g, family="rc", rolloff=float(rolloff))
    if family == "rect_td":
        g = np.zeros(mn)
        g[:n] = 1.0
        return PrototypeFilter(g=g, family="rect_td")
    if family == "rect_full":
        g = np.full(mn, 1.0 / np.sqrt(m))
        return PrototypeFilter(g=g, family="rect_full")
    raise ParameterError(
        f"unknown pulse family {family!r}; expected one of {PULSE_FAMILIES}")


def _signed_bins(size: int) -> np.ndarray:
    """DFT bin indices folded to the signed range (-size/2, size/2]."""
    k = np.arange(size)
    return np.where(k <= size // 2, k, k - size).astype(float)


def _rc_amplitude(x: np.ndarray, alpha: float) -> np.ndarray:
    """Raised-cosine amplitude taper; x in units of the subcarrier spacing."""
    ax = np.abs(x)
    out = np.zeros_like(ax)
    if alpha == 0.0:
        out[ax < 0.5] = 1.0
        out[ax == 0.5] = 0.5
        return out
    flat = ax <= (1.0 - alpha) / 2.0
    edge = (~flat) & (ax < (1.0 + alpha) / 2.0)
    out[flat] = 1.0
    out[edge] = 0.5 * (1.0 + np.cos(np.pi * (ax[edge] - (1.0 - alpha) / 2.0) / alpha))
    return out


def pulse_from_coefficients(g, family: str = "custom",
                            rolloff: float | None = None) -> PrototypeFilter:
    """Wrap externally supplied coefficients (no renormalization applied)."""
    return PrototypeFilter(g=np.asarray(g), family=family, rolloff=rolloff)


def save_pulse_csv(path, pulse: PrototypeFilter) -> None:
    """One row per sample, columns index,re,im."""
    g = np.asarray(pulse.g, dtype=complex)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "re", "im"])
        for i, v in enumerate(g):
            writer.writerow([i, repr(float(v.real)), repr(float(v.imag))])


def load_pulse_csv(path) -> PrototypeFilter:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header] != ["index", "re", "im"]:
            raise ParameterError(f"unexpected pulse CSV header {header!r}")
        for row in reader:
            rows.append((int(row[0]), float(row[1]), float(row[2])))
    rows.sort()
    if [r[0] for r in rows] != list(range(len(rows))):
        raise ParameterError("pulse CSV indices must be 0..len-1 exactly once")
    g = np.array([complex(re, im) for _, re, im in rows])
    if np.allclose(g.imag, 0.0):
        g = g.real
    return PrototypeFilter(g=g, family="custom")


# ---------------------------------------------------------------------------
# permutations and blockwise transforms
#
# All of these accept (..., MN)-shaped arrays and act along the last axis, so
# batches of blocks move through the pipelines in single numpy calls.


def _check_len(v: np.ndarray, mn: int) -> np.ndarray:
    v = np.asarray(v)
    if v.shape[-1] != mn:
        raise ParameterError(f"expected trailing length {mn}, got {v.shape[-1]}")
    return v


def permute_forward(v, params: GfdmParams) -> np.ndarray:
    """Slot-major -> subcarrier-major: out[i] = v[(i mod M)*N + floor(i/M)]."""
    m, n = params.M, params.N
    v = _check_len(v, m * n)
    lead = v.shape[:-1]
    return v.reshape(*lead, m, n).swapaxes(-2, -1).reshape(*lead, m * n)


def permute_inverse(v, params: GfdmParams) -> np.ndarray:
    """Inverse shuffle: out[i] = v[(i mod N)*M + floor(i/N)]."""
    m, n = params.M, params.N
    v = _check_len(v, m * n)
    lead = v.shape[:-1]
    return v.reshape(*lead, n, m).swapaxes(-2, -1).reshape(*lead, m * n)


def idft_per_slot(v, params: GfdmParams) -> np.ndarray:
    """Apply the N-point normalized IDFT to each of the M slot blocks."""
    m, n = params.M, params.N
    v = _check_len(v, m * n)
    lead = v.shape[:-1]
    out = np.fft.ifft(v.reshape(*lead, m, n), axis=-1, norm="ortho")
    return out.reshape(*lead, m * n)


def dft_per_slot(v, params: GfdmParams) -> np.ndarray:
    m, n = params.M, params.N
    v = _check_len(v, m * n)
    lead = v.shape[:-1]
    out = np.fft.fft(v.reshape(*lead, m, n), axis=-1, norm="ortho")
    return out.reshape(*lead, m * n)


def idft_per_subcarrier(v, params: GfdmParams) -> np.ndarray:
    """Apply the M-point normalized IDFT to each of the N subcarrier blocks.

    Operates in the shuffled (subcarrier-major) ordering produced by
    permute_forward.
    """
    m, n = params.M, params.N
    v = _check_len(v, m * n)
    lead = v.shape[:-1]
    out = np.fft.ifft(v.reshape(*lead, n, m), axis=-1, norm="ortho")
    return out.reshape(*lead, m * n)


def dft_per_subcarrier(v, params: GfdmParams) -> np.ndarray:
    m, n = params.M, params.N
    v = _check_len(v, m * n)
    lead = v.shape[:-1]
    out = np.fft.fft(v.reshape(*lead, n, m), axis=-1, norm="ortho")
    return out.reshape(*lead, m * n)


# ---------------------------------------------------------------------------
# spectral diagonals


def spectral_diag_lambda(pulse, params: GfdmParams) -> np.ndarray:
    """lambda(r) = sum_m g[m*N + (r mod N)] * exp(-j*2*pi*m*floor(r/N)/M).

    This is the unnormalized M-point DFT down each polyphase column of
    g.reshape(M, N); entry r lives at DFT frequency floor(r/N), column
    r mod N.
    """
    g = pulse.g if isinstance(pulse, PrototypeFilter) else np.asarray(pulse)
    m, n = params.M, params.N
    g = _check_len(g, m * n)
    return np.fft.fft(g.reshape(m, n), axis=0).ravel()


def spectral_diag_lambda_bar(lam, params: GfdmParams) -> np.ndarray:
    """lambda_bar(r) = lambda((r mod M)*N + floor(r/M)).

    Computed purely by the index map (the forward shuffle), never by
    re-evaluating a sum; the map is what the factorization proof uses and
    keeps the sign convention consistent by construction.
    """
    return permute_forward(np.asarray(lam), params)


def spectral_diagonal(pulse: PrototypeFilter, params: GfdmParams) -> SpectralDiagonal:
    lam = spectral_diag_lambda(pulse, params)
    return SpectralDiagonal(lam=lam, lam_bar=spectral_diag_lambda_bar(lam, params))


# ---------------------------------------------------------------------------
# dense modulation matrices (oracle path)


def _check_cap(params: GfdmParams, oracle_cap: int) -> None:
    if params.block_len > oracle_cap:
        raise CapacityError(
            f"MN={params.block_len} exceeds the dense-matrix cap {oracle_cap}")


def build_modmatrix_direct(pulse: PrototypeFilter, params: GfdmParams,
                           oracle_cap: int = DEFAULT_ORACLE_CAP) -> ModulationMatrix:
    """Columns by definition: cyclic shifts of g modulated per subcarrier."""
    _check_cap(params, oracle_cap)
    m, n = params.M, params.N
    mn = m * n
    g = _check_len(np.asarray(pulse.g), mn)
    rows = np.arange(mn)[:, None]
    cols = np.arange(mn)[None, :]
    slot = cols // n
    subc = cols % n
    a = g[(rows - slot * n) % mn] * np.exp(2j * np.pi * subc * rows / n)
    return ModulationMatrix(a=a / np.sqrt(n), params=params)


def build_modmatrix_factored(pulse: PrototypeFilter, params: GfdmParams,
                             oracle_cap: int = DEFAULT_ORACLE_CAP) -> ModulationMatrix:
    """Materialize the factored pipeline by pushing every basis vector
    through it. Works for any M, N (numpy transforms are not restricted to
    powers of two); the power-of-two policy applies only to the streaming
    fast path."""
    _check_cap(params, oracle_cap)
    mn = params.block_len
    diag = spectral_diagonal(pulse, params)
    # Rows of eye are the basis vectors; row i of the result is A @ e_i,
    # i.e. the i'th column of A.
    cols = factored_modulate(np.eye(mn), diag.lam_bar, params)
    return ModulationMatrix(a=cols.T.copy(), params=params)


def factored_modulate(d, lam_bar: np.ndarray, params: GfdmParams) -> np.ndarray:
    """The factored transmit pipeline, unrestricted sizes.

    In order: per-slot IDFTs, forward shuffle, per-subcarrier DFTs,
    pointwise lambda_bar, per-subcarrier IDFTs, inverse shuffle.
    """
    x = idft_per_slot(np.asarray(d), params)
    x = permute_forward(x, params)
    x = dft_per_subcarrier(x, params)
    x = x * lam_bar
    x = idft_per_subcarrier(x, params)
    return permute_inverse(x, params)
