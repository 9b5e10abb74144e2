"""Rate-1/2 constraint-length-7 convolutional code with Viterbi decoding.

The generator pair is the ubiquitous (171, 133) octal set. Encoding is two
binary convolutions with a six-zero tail flush; decoding is a full 64-state
Viterbi pass, vectorized across states, with deterministic tie-breaking
toward the even predecessor and traceback pinned to the zero state the tail
guarantees.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

_K = 7
_GENERATORS = (0o171, 0o133)
_MEMORY = _K - 1
_STATES = 1 << _MEMORY


@dataclass(frozen=True)
class CodeSpec:
    """Pinned to the (171, 133) K=7 code; other values are rejected."""

    constraint_length: int = _K
    generators_octal: tuple = _GENERATORS
    rate_num: int = 1
    rate_den: int = 2
    termination: str = "zero_tail"

    def __post_init__(self):
        if (self.constraint_length != _K
                or tuple(self.generators_octal) != _GENERATORS
                or (self.rate_num, self.rate_den) != (1, 2)
                or self.termination != "zero_tail"):
            raise ParameterError(
                "only the zero-tail rate-1/2 K=7 (171,133) code is supported")

    @property
    def tail_bits(self) -> int:
        return self.constraint_length - 1

    def coded_len(self, info_len: int) -> int:
        return 2 * (info_len + self.tail_bits)


def _taps(gen: int) -> np.ndarray:
    """MSB-first tap vector of length K: octal 171 -> [1,1,1,1,0,0,1]."""
    return np.array([(gen >> (_K - 1 - j)) & 1 for j in range(_K)], dtype=np.uint8)


def conv_encode(bits, spec: CodeSpec = CodeSpec()) -> np.ndarray:
    """Zero-tail encode; output interleaves the (g0, g1) streams."""
    bits = np.asarray(bits).astype(np.uint8).ravel()
    if bits.size == 0:
        raise ParameterError("cannot encode an empty block")
    flushed = np.concatenate([bits, np.zeros(spec.tail_bits, dtype=np.uint8)])
    out = np.empty((flushed.size, 2), dtype=np.uint8)
    for j, gen in enumerate(spec.generators_octal):
        out[:, j] = np.convolve(flushed, _taps(gen))[: flushed.size] % 2
    return out.ravel()


def _branch_tables(spec: CodeSpec):
    """Per next-state: the two predecessor states, the input bit consumed,
    and the two output bits of each branch."""
    nxt = np.arange(_STATES)
    bit = nxt >> (_MEMORY - 1)
    pred0 = (nxt & (_STATES // 2 - 1)) << 1
    pred1 = pred0 | 1
    outs = np.empty((2, _STATES, 2), dtype=np.uint8)
    for which, pred in enumerate((pred0, pred1)):
        reg = (bit << _MEMORY) | pred
        for j, gen in enumerate(spec.generators_octal):
            masked = reg & gen
            outs[which, :, j] = np.array(
                [bin(v).count("1") & 1 for v in masked], dtype=np.uint8)
    return pred0, pred1, bit, outs


def viterbi_decode(received, spec: CodeSpec = CodeSpec(),
                   soft: bool = False) -> np.ndarray:
    """Maximum-likelihood decode of a zero-tail block.

    Hard mode takes {0,1} code bits and minimizes Hamming distance. Soft
    mode takes real values under the antipodal convention bit b -> 1 - 2b
    (positive means 0) and maximizes correlation, which makes the decision
    invariant to any positive scaling of the input. Metric ties go to the
    even predecessor.
    """
    received = np.asarray(received, dtype=float).ravel()
    if received.size % 2:
        raise ParameterError(f"metric length must be even, got {received.size}")
    steps = received.size // 2
    if steps <= spec.tail_bits:
        raise ParameterError("block too short to contain the zero tail")
    pred0, pred1, bit, outs = _branch_tables(spec)
    if soft:
        # branch gain = sum_j r_j * (1 - 2 c_j); negate to minimize
        ideals = 1.0 - 2.0 * outs.astype(float)
        pairs = received.reshape(steps, 2)
        cost0 = -(pairs @ ideals[0].T)
        cost1 = -(pairs @ ideals[1].T)
    else:
        hard = (received > 0.5).astype(np.uint8).reshape(steps, 2)
        cost0 = (hard[:, None, :] != outs[0]).sum(axis=-1).astype(float)
        cost1 = (hard[:, None, :] != outs[1]).sum(axis=-1).astype(float)

    metric = np.full(_STATES, np.inf)
    metric[0] = 0.0
    trace = np.empty((steps, _STATES), dtype=np.uint8)
    for t in range(steps):
        cand0 = metric[pred0] + cost0[t]
        cand1 = metric[pred1] + cost1[t]
        take1 = cand1 < cand0
        trace[t] = take1
        metric = np.where(take1, cand1, cand0)

    state = 0
    decided = np.empty(steps, dtype=np.uint8)
    for t in range(steps - 1, -1, -1):
        decided[t] = bit[state]
        state = pred1[state] if trace[t, state] else pred0[state]
    return decided[: steps - spec.tail_bits]
