"""Monte Carlo BER sweeps, the OFDM baseline, and condition-number sweeps.

Reproducibility scheme: every (SNR point, batch) pair owns an RNG seeded by
SeedSequence([seed, point_index, batch_index]); the batch partition is a
pure function of the config. Workers therefore change scheduling, never
results, and error counts are integer sums, so CSV output is byte-identical
across worker counts (wall-time column aside).
"""

from __future__ import annotations

import ast
import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from functools import lru_cache

import numpy as np

from . import fec, qam
from .channel import (
    ChannelProfile,
    apply_channel,
    draw_channel,
    etu,
    load_profile,
    profile_tap_bins,
    remove_cp,
)
from .core import (
    GfdmParams,
    build_modmatrix_direct,
    build_prototype_pulse,
    factored_modulate,
    spectral_diagonal,
)
from .errors import ConfigurationError, ParameterError, SingularPulseError
from .receiver import (
    EqualizerKind,
    FdeKind,
    build_deq,
    build_equalizer_direct,
    condition_number,
    equalize_fast,
    fde_equalize,
)
from .transmitter import BasebandSignal, add_cp

MIN_BITS_FLOOR = 10_000

#: Coded bits per Monte Carlo batch, before rounding up to whole blocks.
_BATCH_BIT_TARGET = 25_000


@dataclass(frozen=True)
class SimConfig:
    """One sweep's full description; hashable so derived state can be cached."""

    m: int
    n: int
    n_cp: int
    pulse: str = "rc"
    rolloff: float | None = 0.1
    channel: str = "awgn"
    fde: str = "mmse"
    equalizer: str = "mmse_unbiased"
    qam_order: int = 16
    snr_db: tuple = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    snr_unit: str = "ebn0"
    min_bits: int = 1_000_000
    seed: int = 1
    coding: bool = False
    path: str = "fast"
    fs: float = 1.92e6
    doppler_hz: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "snr_db", tuple(float(v) for v in self.snr_db))
        if self.pulse == "rc" and self.rolloff is None:
            raise ConfigurationError("rc pulse needs a rolloff")
        if self.fde not in ("zf", "mmse"):
            raise ConfigurationError(f"fde must be zf or mmse, got {self.fde!r}")
        if self.equalizer not in ("mf", "zf", "mmse_biased", "mmse_unbiased"):
            raise ConfigurationError(f"unknown equalizer {self.equalizer!r}")
        if self.qam_order not in qam.QAM_ORDERS:
            raise ConfigurationError(
                f"qam_order must be one of {qam.QAM_ORDERS}, got {self.qam_order}")
        if not self.snr_db:
            raise ConfigurationError("snr grid is empty")
        if any(b <= a for a, b in zip(self.snr_db, self.snr_db[1:])):
            raise ConfigurationError("snr grid must be strictly increasing")
        if self.snr_unit not in ("ebn0", "esn0"):
            raise ConfigurationError(
                f"snr_unit must be ebn0 or esn0, got {self.snr_unit!r}")
        if self.min_bits < MIN_BITS_FLOOR:
            raise ConfigurationError(
                f"min_bits must be >= {MIN_BITS_FLOOR}, got {self.min_bits}")
        if self.path not in ("fast", "direct"):
            raise ConfigurationError(f"path must be fast or direct, got {self.path!r}")
        if self.fs <= 0:
            raise ConfigurationError(f"fs must be positive, got {self.fs}")
        if self.coding and self.coded_bits_per_block // 2 - 6 < 1:
            raise ConfigurationError(
                "block too small to carry a coded payload plus the tail")

    @property
    def bits_per_symbol(self) -> int:
        return int(math.log2(self.qam_order))

    @property
    def coded_bits_per_block(self) -> int:
        return self.m * self.n * self.bits_per_symbol

    @property
    def info_bits_per_block(self) -> int:
        if self.coding:
            return self.coded_bits_per_block // 2 - 6
        return self.coded_bits_per_block

    @property
    def code_rate(self) -> float:
        return 0.5 if self.coding else 1.0

    def esn0_db(self, point_db: float) -> float:
        if self.snr_unit == "esn0":
            return point_db
        return point_db + 10.0 * math.log10(self.bits_per_symbol * self.code_rate)


def case_i(**overrides) -> SimConfig:
    """High subcarrier count, few slots (15 kHz subcarriers at 1.92 MHz)."""
    base = dict(m=8, n=128, n_cp=16, pulse="rc", rolloff=0.1, channel="etu",
                fde="mmse", equalizer="mmse_unbiased", qam_order=16,
                fs=1.92e6, doppler_hz=100.0)
    base.update(overrides)
    return SimConfig(**base)


def case_ii(**overrides) -> SimConfig:
    """Few subcarriers, many slots (240 kHz subcarriers at 1.92 MHz)."""
    base = dict(m=128, n=8, n_cp=16, pulse="rc", rolloff=0.1, channel="etu",
                fde="mmse", equalizer="mmse_unbiased", qam_order=16,
                fs=1.92e6, doppler_hz=100.0)
    base.update(overrides)
    return SimConfig(**base)


@dataclass(frozen=True)
class BerRecord:
    snr_db: float
    bits_simulated: int
    bit_errors: int
    ber: float
    wall_time_s: float


# ---------------------------------------------------------------------------
# derived, cached per-process state


@dataclass(frozen=True)
class _Derived:
    params: GfdmParams
    lam_bar: np.ndarray = field(repr=False)
    profile: ChannelProfile | None
    ratios: tuple
    factors: tuple = field(repr=False)
    a_mat: np.ndarray | None = field(repr=False)
    a_eq: tuple = field(repr=False)
    blocks_per_batch: int
    n_batches: int


def _resolve_profile(channel: str) -> ChannelProfile | None:
    tag = channel.lower()
    if tag == "awgn":
        return None
    if tag == "etu":
        return etu()
    return load_profile(channel)


@lru_cache(maxsize=8)
def _derived(config: SimConfig) -> _Derived:
    """Everything reusable across batches; also the pre-flight validator."""
    params = GfdmParams(M=config.m, N=config.n, n_cp=config.n_cp)
    if config.path == "fast" and not params.fast_path_ok():
        raise ConfigurationError(
            f"fast path needs power-of-two sizes, got M={config.m}, N={config.n}")
    pulse = build_prototype_pulse(config.pulse, params, rolloff=config.rolloff)
    diag = spectral_diagonal(pulse, params)
    profile = _resolve_profile(config.channel)
    if profile is not None:
        span = int(profile_tap_bins(profile, config.fs).max()) + 1
        if span > config.n_cp:
            raise ConfigurationError(
                f"channel profile spans L={span} samples but n_cp={config.n_cp}")
    ratios = tuple(10.0 ** (-config.esn0_db(p) / 10.0) for p in config.snr_db)
    kind = EqualizerKind(config.equalizer)
    factors = tuple(build_deq(diag.lam_bar, kind, r) for r in ratios)
    a_mat = None
    a_eq = ()
    if config.path == "direct":
        mod = build_modmatrix_direct(pulse, params)
        a_mat = mod.a
        a_eq = tuple(build_equalizer_direct(mod, kind, r) for r in ratios)
    blocks = max(1, math.ceil(_BATCH_BIT_TARGET / config.coded_bits_per_block))
    per_batch = blocks * config.info_bits_per_block
    n_batches = math.ceil(config.min_bits / per_batch)
    return _Derived(params=params, lam_bar=diag.lam_bar, profile=profile,
                    ratios=ratios, factors=factors, a_mat=a_mat, a_eq=a_eq,
                    blocks_per_batch=blocks, n_batches=n_batches)


def _batch_errors(config: SimConfig, point_idx: int, batch_idx: int) -> tuple:
    """(bit errors, info bits) for one seeded batch; order-independent."""
    st = _derived(config)
    rng = np.random.default_rng(
        np.random.SeedSequence([config.seed, point_idx, batch_idx]))
    blocks = st.blocks_per_batch
    info = rng.integers(0, 2, (blocks, config.info_bits_per_block), dtype=np.uint8)
    if config.coding:
        coded = np.stack([fec.conv_encode(row) for row in info])
    else:
        coded = info
    d = qam.qam_map(coded, config.qam_order)
    if config.path == "fast":
        x = factored_modulate(d, st.lam_bar, st.params)
    else:
        x = d @ st.a_mat.T
    xcp = add_cp(BasebandSignal(x=x), config.n_cp)
    sigma_nu2 = st.ratios[point_idx]

    if st.profile is None:
        y = apply_channel(xcp, np.ones(1, dtype=complex), sigma_nu2, rng)
        y_eq = remove_cp(y, st.params, 1)
    else:
        fde_kind = FdeKind(config.fde)
        rows = []
        for blk in range(blocks):
            real = draw_channel(st.profile, config.fs, rng, st.params)
            one = BasebandSignal(x=xcp.x[blk], has_cp=True, n_cp=config.n_cp)
            z = remove_cp(apply_channel(one, real.h, sigma_nu2, rng),
                          st.params, real.L)
            rows.append(fde_equalize(z, real.Lambda, fde_kind, sigma_nu2))
        y_eq = np.stack(rows)

    if config.path == "fast":
        d_hat = equalize_fast(y_eq, st.factors[point_idx], st.params).d_hat
    else:
        d_hat = y_eq @ st.a_eq[point_idx].T
    hard = qam.qam_demap(d_hat, config.qam_order)
    if config.coding:
        decided = np.stack([fec.viterbi_decode(row.astype(float)) for row in hard])
    else:
        decided = hard
    return int(np.sum(decided != info)), int(info.size)


def run_ber_sweep(config: SimConfig, workers: int = 1,
                  out_csv=None) -> list[BerRecord]:
    """Full sweep over config.snr_db; optionally writes the CSV too.

    workers is a run argument, never part of the config, because it must not
    influence results.
    """
    st = _derived(config)  # validates before any work is scheduled
    records = []
    jobs = [(config, p, b) for p in range(len(config.snr_db))
            for b in range(st.n_batches)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            t0 = time.perf_counter()
            outcomes = list(pool.map(_batch_worker, jobs, chunksize=4))
    else:
        t0 = time.perf_counter()
        outcomes = [_batch_worker(job) for job in jobs]
    elapsed = time.perf_counter() - t0
    per_point = elapsed / len(config.snr_db)
    for p, point_db in enumerate(config.snr_db):
        chunk = outcomes[p * st.n_batches:(p + 1) * st.n_batches]
        errors = sum(e for e, _ in chunk)
        bits = sum(b for _, b in chunk)
        records.append(BerRecord(snr_db=point_db, bits_simulated=bits,
                                 bit_errors=errors, ber=errors / bits,
                                 wall_time_s=per_point))
    if out_csv is not None:
        write_ber_csv(out_csv, config, records)
    return records


def _batch_worker(job) -> tuple:
    config, point_idx, batch_idx = job
    return _batch_errors(config, point_idx, batch_idx)


def ofdm_baseline(config: SimConfig, workers: int = 1,
                  out_csv=None) -> list[BerRecord]:
    """CP-OFDM reference: 128 subcarriers, one slot, rectangular pulse,
    per-symbol channel draw and FDE; everything else (order, grid, seed,
    coding, channel) inherited from config."""
    ofdm = ofdm_config(config)
    return run_ber_sweep(ofdm, workers=workers, out_csv=out_csv)


def ofdm_config(config: SimConfig, n_subcarriers: int = 128) -> SimConfig:
    return replace(config, m=1, n=n_subcarriers, pulse="rect_td", rolloff=None,
                   equalizer="zf")


# ---------------------------------------------------------------------------
# condition-number sweep


def run_condition_sweep(n: int, m_list, pulse: str, rolloff: float | None,
                        snr_db: float, kinds=("zf", "mmse_biased"),
                        out_csv=None) -> list[dict]:
    """kappa of the self-interference equalizer across block heights.

    snr_db is treated as sigma_d^2/sigma_nu^2 in dB (the regularizer the
    MMSE kinds use). Singular ZF points become kappa = inf rows so a sweep
    over singular pulses still completes.
    """
    ratio = 10.0 ** (-snr_db / 10.0)
    rows = []
    for m in m_list:
        params = GfdmParams(M=int(m), N=int(n))
        pf = build_prototype_pulse(pulse, params, rolloff=rolloff)
        diag = spectral_diagonal(pf, params)
        for kind in kinds:
            try:
                kappa = condition_number(diag.lam_bar, EqualizerKind(kind), ratio)
            except SingularPulseError:
                kappa = math.inf
            rows.append({"M": int(m), "kind": EqualizerKind(kind).value,
                         "kappa": kappa})
    if out_csv is not None:
        write_condition_csv(out_csv, rows)
    return rows


# ---------------------------------------------------------------------------
# config files and CSV emission


def load_config(path, **overrides) -> SimConfig:
    """Key-value config file (`key = value` lines, # comments) +
    keyword overrides. Lists use brackets or comma separation."""
    raw: dict = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise ParameterError(f"bad config line {line!r}")
            raw[key.strip()] = val.strip()
    parsed: dict = {}
    valid = {f.name for f in fields(SimConfig)}
    for key, val in raw.items():
        if key not in valid:
            raise ParameterError(f"unknown config key {key!r}")
        parsed[key] = _parse_config_value(key, val)
    parsed.update(overrides)
    try:
        return SimConfig(**parsed)
    except TypeError as exc:
        raise ParameterError(str(exc)) from None


_INT_KEYS = {"m", "n", "n_cp", "qam_order", "min_bits", "seed"}
_FLOAT_KEYS = {"rolloff", "fs", "doppler_hz"}
_BOOL_KEYS = {"coding"}


def _parse_config_value(key: str, val: str):
    if key == "snr_db":
        if val.startswith("["):
            return tuple(float(v) for v in ast.literal_eval(val))
        return tuple(float(tok) for tok in val.replace(",", " ").split())
    if key in _INT_KEYS:
        return int(val)
    if key in _FLOAT_KEYS:
        return None if val.lower() == "none" else float(val)
    if key in _BOOL_KEYS:
        lowered = val.lower()
        if lowered in ("1", "true", "on", "yes"):
            return True
        if lowered in ("0", "false", "off", "no"):
            return False
        raise ParameterError(f"cannot parse boolean {val!r} for {key}")
    return val


def config_metadata_lines(config: SimConfig) -> list[str]:
    """Deterministic `# key=value` comment block for CSV headers."""
    lines = []
    for f in fields(SimConfig):
        value = getattr(config, f.name)
        if f.name == "snr_db":
            value = ",".join(repr(v) for v in value)
        lines.append(f"# {f.name}={value}")
    return lines


BER_CSV_HEADER = ["snr_db", "bits_simulated", "bit_errors", "ber", "wall_time_s"]


def write_ber_csv(path, config: SimConfig, records) -> None:
    with open(path, "w", newline="") as fh:
        for line in config_metadata_lines(config):
            fh.write(line + "\n")
        writer = csv.writer(fh)
        writer.writerow(BER_CSV_HEADER)
        for rec in records:
            writer.writerow([repr(rec.snr_db), rec.bits_simulated,
                             rec.bit_errors, repr(rec.ber),
                             f"{rec.wall_time_s:.3f}"])


def write_condition_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["M", "kind", "kappa"])
        for row in rows:
            writer.writerow([row["M"], row["kind"], repr(row["kappa"])])


def gnuplot_script(csv_path, out_path=None) -> str:
    """A minimal gnuplot companion for a BER CSV."""
    text = "\n".join([
        "set datafile separator ','",
        "set logscale y",
        "set xlabel 'SNR (dB)'",
        "set ylabel 'BER'",
        "set grid",
        f"plot '{csv_path}' using 1:4 with linespoints title 'BER'",
        "",
    ])
    if out_path is not None:
        with open(out_path, "w") as fh:
            fh.write(text)
    return text
