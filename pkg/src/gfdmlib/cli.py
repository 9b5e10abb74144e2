"""Command-line front end.

Subcommands: modulate, demodulate, ber, flops, condition, selftest. Outputs
land in the directory named by GFDMLIB_OUTDIR when a bare file name is given
(that variable controls nothing else); paths with a directory part are used
as given. Exit status is 0 on success, 2 on a typed library error (the error
class name is printed to stderr).
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import flops as flops_mod
from . import sim
from .channel import remove_cp
from .core import (
    GfdmParams,
    PULSE_FAMILIES,
    build_modmatrix_direct,
    build_prototype_pulse,
    spectral_diagonal,
)
from .errors import GfdmError, ParameterError
from .qam import QAM_ORDERS, qam_demap, qam_map
from .receiver import EqualizerKind, build_deq, build_equalizer_direct, equalize_fast
from .transmitter import BasebandSignal, add_cp, load_iq, save_iq
from .core import factored_modulate


def _resolve_out(name: str | None) -> str | None:
    """Bare file names go under GFDMLIB_OUTDIR (default: cwd)."""
    if name is None:
        return None
    if os.path.isabs(name) or os.path.dirname(name):
        return name
    return os.path.join(os.environ.get("GFDMLIB_OUTDIR", "."), name)


def _read_bits(path) -> np.ndarray:
    with open(path) as fh:
        text = fh.read()
    bits = [c for c in text if c in "01"]
    if not bits:
        raise ParameterError(f"no 0/1 characters found in {path}")
    return np.array(bits, dtype=np.uint8)


def _write_bits(path, bits: np.ndarray, per_line: int) -> None:
    flat = np.asarray(bits).ravel()
    with open(path, "w") as fh:
        for start in range(0, flat.size, per_line):
            fh.write("".join(str(int(b)) for b in flat[start:start + per_line]))
            fh.write("\n")


def _rebuild_pulse(spec: dict, params: GfdmParams):
    family = spec.get("pulse")
    if family is None:
        raise ParameterError(
            "I/Q header does not name a pulse; cannot equalize")
    rolloff = float(spec["rolloff"]) if "rolloff" in spec else None
    return build_prototype_pulse(family, params, rolloff=rolloff)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_modulate(args) -> int:
    params = GfdmParams(M=args.m, N=args.n, n_cp=args.n_cp)
    pulse = build_prototype_pulse(args.pulse, params, rolloff=args.rolloff)
    per_block = params.block_len * int(np.log2(args.order))
    if args.bits is not None:
        bits = _read_bits(args.bits)
    else:
        rng = np.random.default_rng(args.seed)
        bits = rng.integers(0, 2, args.random_bits, dtype=np.uint8)
    if bits.size % per_block:
        raise ParameterError(
            f"bit count {bits.size} is not a multiple of {per_block} "
            f"(MN log2(order) per block)")
    blocks = bits.size // per_block
    d = qam_map(bits.reshape(blocks, per_block), args.order)
    if params.fast_path_ok():
        diag = spectral_diagonal(pulse, params)
        x = factored_modulate(d, diag.lam_bar, params)
    else:
        x = d @ build_modmatrix_direct(pulse, params).a.T
    sig = BasebandSignal(x=x, n_cp=params.n_cp)
    if args.n_cp > 0:
        sig = add_cp(sig)
    out = _resolve_out(args.out)
    save_iq(out, sig, params, pulse, fmt=args.fmt)
    if args.bits is None:
        _write_bits(out + ".bits", bits, per_block)
    print(f"wrote {blocks} block(s), {sig.x.size} samples to {out}")
    return 0


def _cmd_demodulate(args) -> int:
    sig, params, spec = load_iq(args.infile)
    per_block = params.block_len + (sig.n_cp if sig.has_cp else 0)
    if sig.x.size % per_block:
        raise ParameterError(
            f"{sig.x.size} samples do not divide into blocks of {per_block}")
    x = sig.x.reshape(-1, per_block)
    if sig.has_cp:
        x = remove_cp(x, params, 1)
    pulse = _rebuild_pulse(spec, params)
    kind = EqualizerKind(args.equalizer)
    if params.fast_path_ok():
        diag = spectral_diagonal(pulse, params)
        factors = build_deq(diag.lam_bar, kind, args.snr_ratio)
        d_hat = equalize_fast(x, factors, params).d_hat
    else:
        a_eq = build_equalizer_direct(
            build_modmatrix_direct(pulse, params), kind, args.snr_ratio)
        d_hat = x @ a_eq.T
    bits = qam_demap(d_hat, args.order)
    out = _resolve_out(args.out)
    per_line = params.block_len * int(np.log2(args.order))
    _write_bits(out, bits, per_line)
    print(f"wrote {bits.size} bits to {out}")
    return 0


def _parse_overrides(pairs) -> dict:
    from dataclasses import fields

    valid = {f.name for f in fields(sim.SimConfig)}
    overrides = {}
    for pair in pairs or ():
        key, sep, val = pair.partition("=")
        if not sep:
            raise ParameterError(f"--set expects key=value, got {pair!r}")
        key = key.strip()
        if key not in valid:
            raise ParameterError(f"unknown config key {key!r}")
        overrides[key] = sim._parse_config_value(key, val.strip())
    return overrides


_PRESETS = {"case1": sim.case_i, "case2": sim.case_ii}


def _cmd_ber(args) -> int:
    overrides = _parse_overrides(args.set)
    if args.config is not None and args.preset is not None:
        raise ParameterError("give either --config or --preset, not both")
    if args.config is not None:
        config = sim.load_config(args.config, **overrides)
    elif args.preset is not None:
        config = _PRESETS[args.preset](**overrides)
    else:
        raise ParameterError("one of --config or --preset is required")
    if args.ofdm:
        config = sim.ofdm_config(config)
    out = _resolve_out(args.out)
    records = sim.run_ber_sweep(config, workers=args.workers, out_csv=out)
    for rec in records:
        print(f"snr_db={rec.snr_db:g} ber={rec.ber:.6g} "
              f"errors={rec.bit_errors}/{rec.bits_simulated}")
    if out is not None:
        print(f"wrote {out}")
        if args.gnuplot:
            sim.gnuplot_script(out, out + ".gp")
            print(f"wrote {out}.gp")
    return 0


def _int_list(text: str) -> list:
    return [int(tok) for tok in text.replace(",", " ").split()]


def _cmd_flops(args) -> int:
    channel = flops_mod.ChannelKind[args.channel.upper()]
    if args.schemes == "all":
        if channel is flops_mod.ChannelKind.AWGN:
            schemes = list(flops_mod.SchemeId)
        else:
            schemes = [s for s in flops_mod.SchemeId
                       if s not in flops_mod.TX_SCHEMES]
    else:
        try:
            schemes = [flops_mod.SchemeId[tok.strip().upper()]
                       for tok in args.schemes.split(",")]
        except KeyError as exc:
            raise ParameterError(f"unknown scheme {exc.args[0]!r}") from None
    rows = flops_mod.complexity_report(_int_list(args.m), _int_list(args.n),
                                       schemes, channel=channel,
                                       ell=args.ell, iters=args.iters)
    if args.markdown:
        print(flops_mod.markdown_report(rows))
    if args.out is not None:
        out = _resolve_out(args.out)
        flops_mod.write_flops_csv(out, rows)
        print(f"wrote {out}")
    elif not args.markdown:
        for row in rows:
            print(f"{row['scheme']} M={row['M']} N={row['N']}: {row['flops']} "
                  f"({row['ratio_to_ofdm']:.2f}x OFDM)")
    return 0


def _cmd_condition(args) -> int:
    kinds = tuple(tok.strip() for tok in args.kinds.split(","))
    out = _resolve_out(args.out)
    rows = sim.run_condition_sweep(args.n, _int_list(args.m), args.pulse,
                                   args.rolloff, args.snr_db, kinds=kinds,
                                   out_csv=out)
    for row in rows:
        print(f"M={row['M']} {row['kind']}: kappa={row['kappa']:.6g}")
    if out is not None:
        print(f"wrote {out}")
    return 0


def _cmd_selftest(args) -> int:
    from .core import build_modmatrix_factored

    failures = 0

    def check(name, ok, detail=""):
        nonlocal failures
        tag = "PASS" if ok else "FAIL"
        if not ok:
            failures += 1
        print(f"{tag} {name}" + (f" ({detail})" if detail else ""))

    params = GfdmParams(M=4, N=8)
    pulse = build_prototype_pulse("rc", params, rolloff=0.5)
    direct = build_modmatrix_direct(pulse, params).a
    factored = build_modmatrix_factored(pulse, params).a
    resid = float(np.max(np.abs(direct - factored)))
    check("factorization", resid < 1e-10, f"residual {resid:.2e}")

    rng = np.random.default_rng(1)
    d = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    diag = spectral_diagonal(pulse, params)
    err = np.linalg.norm(factored_modulate(d, diag.lam_bar, params) - direct @ d)
    err /= np.linalg.norm(direct @ d)
    check("fast transmitter", err < 1e-10, f"relative {err:.2e}")

    worst = 0.0
    mod = build_modmatrix_direct(pulse, params)
    y = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    for kind in EqualizerKind:
        factors = build_deq(diag.lam_bar, kind, 0.1)
        fast = equalize_fast(y, factors, params).d_hat
        dense = build_equalizer_direct(mod, kind, 0.1) @ y
        worst = max(worst, float(np.linalg.norm(fast - dense)
                                 / np.linalg.norm(dense)))
    check("fast receiver", worst < 1e-9, f"worst relative {worst:.2e}")

    bits = rng.integers(0, 2, 4 * 32, dtype=np.uint8)
    sym = qam_map(bits, 16)
    check("qam round-trip", bool(np.array_equal(qam_demap(sym, 16), bits)))

    from .fec import conv_encode, viterbi_decode
    info = rng.integers(0, 2, 200, dtype=np.uint8)
    coded = conv_encode(info)
    coded[17] ^= 1
    check("fec single-error correction",
          bool(np.array_equal(viterbi_decode(coded), info)))

    cfg = sim.SimConfig(m=4, n=16, n_cp=16, channel="etu", qam_order=16,
                        snr_db=(15.0,), min_bits=10_000, seed=5)
    a = sim.run_ber_sweep(cfg)[0]
    b = sim.run_ber_sweep(cfg, workers=2)[0]
    check("determinism across workers", a.bit_errors == b.bit_errors,
          f"{a.bit_errors} errors")

    big = GfdmParams(M=16, N=128)
    bp = build_prototype_pulse("rc", big, rolloff=0.1)
    bd = spectral_diagonal(bp, big)
    data = rng.standard_normal(big.block_len) + 1j * rng.standard_normal(big.block_len)
    t0 = time.perf_counter()
    for _ in range(20):
        factored_modulate(data, bd.lam_bar, big)
    t_fast = (time.perf_counter() - t0) / 20
    a_big = build_modmatrix_direct(bp, big).a
    t0 = time.perf_counter()
    for _ in range(20):
        a_big @ data
    t_dense = (time.perf_counter() - t0) / 20
    print(f"INFO fast vs dense matvec at MN={big.block_len}: "
          f"{t_dense / t_fast:.1f}x (measured, not asserted)")

    print("selftest:", "ok" if failures == 0 else f"{failures} failure(s)")
    return 0 if failures == 0 else 1


# ---------------------------------------------------------------------------
# argument wiring


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gfdmlib",
        description="GFDM transceiver toolkit: waveform I/O, BER sweeps, "
                    "flop reports, condition numbers.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("modulate", help="map bits to a baseband I/Q file")
    p.add_argument("--m", type=int, required=True, help="time slots per block")
    p.add_argument("--n", type=int, required=True, help="subcarriers")
    p.add_argument("--n-cp", type=int, default=0)
    p.add_argument("--pulse", default="rc", choices=sorted(PULSE_FAMILIES))
    p.add_argument("--rolloff", type=float, default=None)
    p.add_argument("--order", type=int, default=16, choices=QAM_ORDERS)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--bits", help="text file of 0/1 characters")
    src.add_argument("--random-bits", type=int,
                     help="generate this many random bits (see --seed)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fmt", default="bin", choices=("bin", "csv"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_modulate)

    p = sub.add_parser("demodulate", help="recover bits from an I/Q file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--equalizer", default="zf",
                   choices=[k.value for k in EqualizerKind])
    p.add_argument("--snr-ratio", type=float, default=0.0,
                   help="sigma_nu^2 / sigma_d^2 for the MMSE kinds")
    p.add_argument("--order", type=int, default=16, choices=QAM_ORDERS)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_demodulate)

    p = sub.add_parser("ber", help="Monte Carlo BER sweep")
    p.add_argument("--config", help="key-value config file")
    p.add_argument("--preset", choices=sorted(_PRESETS))
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config field (repeatable)")
    p.add_argument("--ofdm", action="store_true",
                   help="run the CP-OFDM baseline for this config")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="CSV output file")
    p.add_argument("--gnuplot", action="store_true",
                   help="also write a gnuplot script next to the CSV")
    p.set_defaults(func=_cmd_ber)

    p = sub.add_parser("flops", help="arithmetic cost report")
    p.add_argument("--m", required=True, help="comma-separated M values")
    p.add_argument("--n", required=True, help="comma-separated N values")
    p.add_argument("--schemes", default="all",
                   help="comma-separated SchemeId names, or 'all'")
    p.add_argument("--channel", default="awgn",
                   choices=[c.name.lower() for c in flops_mod.ChannelKind])
    p.add_argument("--ell", type=int, default=None,
                   help="overlap factor L (defaults to N)")
    p.add_argument("--iters", type=int, default=None,
                   help="SIC iteration count (defaults to 8)")
    p.add_argument("--markdown", action="store_true")
    p.add_argument("--out", help="CSV output file")
    p.set_defaults(func=_cmd_flops)

    p = sub.add_parser("condition", help="equalizer condition-number sweep")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", required=True, help="comma-separated M values")
    p.add_argument("--pulse", default="rc", choices=sorted(PULSE_FAMILIES))
    p.add_argument("--rolloff", type=float, default=0.9)
    p.add_argument("--snr-db", type=float, default=30.0,
                   help="sigma_d^2/sigma_nu^2 in dB for the MMSE kinds")
    p.add_argument("--kinds", default="zf,mmse_biased")
    p.add_argument("--out", help="CSV output file")
    p.set_defaults(func=_cmd_condition)

    p = sub.add_parser("selftest", help="quick internal consistency battery")
    p.set_defaults(func=_cmd_selftest)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GfdmError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
