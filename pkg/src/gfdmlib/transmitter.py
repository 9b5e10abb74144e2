"""Direct and fast modulators, cyclic prefix, and baseband I/Q export.

The fast path is the factored pipeline restricted to power-of-two M and N
(the sizes the flop model prices); the direct path is the dense A @ d product
and accepts any geometry. Both end in the same BasebandSignal.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .core import (
    DataGrid,
    GfdmParams,
    ModulationMatrix,
    PrototypeFilter,
    SpectralDiagonal,
    factored_modulate,
)
from .errors import ParameterError, UnsupportedSizeError


@dataclass(frozen=True)
class BasebandSignal:
    """A transmit block, optionally carrying its cyclic prefix.

    x has length MN without CP and MN + n_cp with it; n_cp is kept even when
    has_cp is False so the receive side knows what to strip later.
    """

    x: np.ndarray
    has_cp: bool = False
    n_cp: int = 0

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x))


def _as_vec(d) -> np.ndarray:
    return d.d if isinstance(d, DataGrid) else np.asarray(d)


def modulate_direct(a: ModulationMatrix, d) -> BasebandSignal:
    """x = A @ d with the dense matrix. Oracle path; any M, N."""
    vec = _as_vec(d)
    if vec.shape[-1] != a.a.shape[1]:
        raise ParameterError(
            f"data length {vec.shape[-1]} does not match A's {a.a.shape[1]} columns")
    return BasebandSignal(x=vec @ a.a.T, n_cp=a.params.n_cp)


def modulate_fast(params: GfdmParams, diag, d) -> BasebandSignal:
    """Factored modulation: per-slot IDFTs, shuffle, per-subcarrier DFTs,
    pointwise lambda_bar, per-subcarrier IDFTs, unshuffle.

    Restricted to power-of-two M and N; callers fall back to
    modulate_direct for other geometries.
    """
    if not params.fast_path_ok():
        raise UnsupportedSizeError(
            f"fast path needs power-of-two M and N, got M={params.M}, N={params.N}")
    lam_bar = diag.lam_bar if isinstance(diag, SpectralDiagonal) else np.asarray(diag)
    vec = _as_vec(d)
    return BasebandSignal(x=factored_modulate(vec, lam_bar, params), n_cp=params.n_cp)


def add_cp(sig: BasebandSignal, n_cp: int | None = None) -> BasebandSignal:
    """Prepend the last n_cp samples: [x[-n_cp:] ; x]."""
    if sig.has_cp:
        raise ParameterError("signal already carries a cyclic prefix")
    if n_cp is None:
        n_cp = sig.n_cp
    block = sig.x.shape[-1]
    if not 0 <= n_cp <= block:
        raise ParameterError(f"n_cp must lie in [0, {block}], got {n_cp}")
    if n_cp == 0:
        return BasebandSignal(x=sig.x, has_cp=True, n_cp=0)
    out = np.concatenate([sig.x[..., block - n_cp:], sig.x], axis=-1)
    return BasebandSignal(x=out, has_cp=True, n_cp=n_cp)


# ---------------------------------------------------------------------------
# I/Q export / import
#
# Binary form: interleaved little-endian float64 pairs (re, im). CSV form:
# index,re,im rows like the pulse files. Either way a .hdr sidecar written
# next to the payload records the geometry needed to demodulate later.


def _header_path(path) -> str:
    return str(path) + ".hdr"


def save_iq(path, sig: BasebandSignal, params: GfdmParams,
            pulse: PrototypeFilter | None = None, fmt: str = "bin") -> None:
    """Write one block of I/Q samples plus a key-value header sidecar."""
    x = np.asarray(sig.x, dtype=complex).ravel()
    if fmt == "bin":
        inter = np.empty(2 * x.size)
        inter[0::2] = x.real
        inter[1::2] = x.imag
        inter.astype("<f8").tofile(path)
    elif fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "re", "im"])
            for i, v in enumerate(x):
                writer.writerow([i, repr(float(v.real)), repr(float(v.imag))])
    else:
        raise ParameterError(f"unknown I/Q format {fmt!r}; use 'bin' or 'csv'")
    lines = [
        f"format {fmt}",
        f"M {params.M}",
        f"N {params.N}",
        f"n_cp {sig.n_cp}",
        f"has_cp {int(sig.has_cp)}",
        f"samples {x.size}",
    ]
    if pulse is not None:
        lines.append(f"pulse {pulse.family}")
        if pulse.rolloff is not None:
            lines.append(f"rolloff {pulse.rolloff!r}")
    with open(_header_path(path), "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_iq(path):
    """Read a block written by save_iq. Returns (BasebandSignal, GfdmParams,
    pulse spec dict)."""
    header = {}
    with open(_header_path(path)) as fh:
        for raw in fh:
            raw = raw.strip()
            if not raw or raw.startswith("#"):
                continue
            key, _, val = raw.partition(" ")
            header[key] = val
    try:
        fmt = header["format"]
        m, n = int(header["M"]), int(header["N"])
        n_cp = int(header["n_cp"])
        has_cp = bool(int(header["has_cp"]))
        count = int(header["samples"])
    except KeyError as missing:
        raise ParameterError(f"I/Q header is missing {missing}") from None
    if fmt == "bin":
        inter = np.fromfile(path, dtype="<f8")
        if inter.size != 2 * count:
            raise ParameterError(
                f"expected {2 * count} floats in {path}, found {inter.size}")
        x = inter[0::2] + 1j * inter[1::2]
    elif fmt == "csv":
        x = _read_iq_csv(path)
        if x.size != count:
            raise ParameterError(
                f"expected {count} samples in {path}, found {x.size}")
    else:
        raise ParameterError(f"unknown I/Q format {fmt!r} in header")
    params = GfdmParams(M=m, N=n, n_cp=n_cp)
    spec = {k: header[k] for k in ("pulse", "rolloff") if k in header}
    return BasebandSignal(x=x, has_cp=has_cp, n_cp=n_cp), params, spec


def _read_iq_csv(path) -> np.ndarray:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header] != ["index", "re", "im"]:
            raise ParameterError(f"unexpected I/Q CSV header {header!r}")
        for row in reader:
            rows.append((int(row[0]), float(row[1]), float(row[2])))
    rows.sort()
    return np.array([complex(re, im) for _, re, im in rows])
