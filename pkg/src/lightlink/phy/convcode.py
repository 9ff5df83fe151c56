"""K=7 convolutional code (generators 133/171 octal) with 802.11 puncturing
and a soft-decision Viterbi decoder.

LLR convention throughout: positive LLR means bit 0 is more likely.
Punctured positions are re-inserted as LLR 0 (erasures) before decoding.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from numba import njit

K = 7
N_STATES = 64
G0 = 0o133
G1 = 0o171

# Interleaved (a0, b0, a1, b1, ...) keep-masks per coding rate.
PUNCTURE = {
    Fraction(1, 2): np.array([1, 1], dtype=np.uint8),
    Fraction(2, 3): np.array([1, 1, 1, 0], dtype=np.uint8),
    Fraction(3, 4): np.array([1, 1, 1, 0, 0, 1], dtype=np.uint8),
    Fraction(5, 6): np.array([1, 1, 1, 0, 0, 1, 1, 0, 0, 1], dtype=np.uint8),
}


def _parity(x: int) -> int:
    return bin(x).count("1") & 1


def _build_trellis():
    """next_state[s, u] and output pair for input bit u in state s.

    State s encodes the previous 6 input bits, most recent bit in the MSB.
    """
    next_state = np.zeros((N_STATES, 2), dtype=np.int64)
    out_a = np.zeros((N_STATES, 2), dtype=np.uint8)
    out_b = np.zeros((N_STATES, 2), dtype=np.uint8)
    for s in range(N_STATES):
        for u in (0, 1):
            reg = (u << 6) | s  # 7-bit window, newest bit at MSB
            out_a[s, u] = _parity(reg & G0)
            out_b[s, u] = _parity(reg & G1)
            next_state[s, u] = (u << 5) | (s >> 1)
    return next_state, out_a, out_b


NEXT_STATE, OUT_A, OUT_B = _build_trellis()

_G0_TAPS = np.array([(G0 >> (6 - i)) & 1 for i in range(7)], dtype=np.uint8)
_G1_TAPS = np.array([(G1 >> (6 - i)) & 1 for i in range(7)], dtype=np.uint8)


def conv_encode(bits: np.ndarray, rate: Fraction) -> np.ndarray:
    """Encode and puncture. Input length must fill whole puncture periods."""
    if rate not in PUNCTURE:
        raise ValueError(f"unsupported coding rate {rate}")
    bits = np.asarray(bits, dtype=np.uint8)
    period_in = len(PUNCTURE[rate]) // 2
    if len(bits) % period_in:
        raise ValueError(
            f"input length {len(bits)} does not yield an integral punctured "
            f"output at rate {rate}"
        )
    padded = np.concatenate([np.zeros(K - 1, dtype=np.uint8), bits])
    a = np.zeros(len(bits), dtype=np.uint8)
    b = np.zeros(len(bits), dtype=np.uint8)
    for i, (ta, tb) in enumerate(zip(_G0_TAPS, _G1_TAPS)):
        seg = padded[K - 1 - i : K - 1 - i + len(bits)]
        if ta:
            a ^= seg
        if tb:
            b ^= seg
    inter = np.empty(2 * len(bits), dtype=np.uint8)
    inter[0::2] = a
    inter[1::2] = b
    mask = np.tile(PUNCTURE[rate], len(bits) // period_in)
    return inter[mask.astype(bool)]


def depuncture_llrs(llrs: np.ndarray, rate: Fraction) -> np.ndarray:
    """Expand a punctured LLR stream back to the mother-rate lattice."""
    pattern = PUNCTURE[rate]
    n_keep = int(pattern.sum())
    if len(llrs) % n_keep:
        raise ValueError(f"punctured length {len(llrs)} not a multiple of pattern for {rate}")
    n_periods = len(llrs) // n_keep
    out = np.zeros(n_periods * len(pattern), dtype=np.float64)
    mask = np.tile(pattern, n_periods).astype(bool)
    out[mask] = llrs
    return out


@njit(cache=True)
def _viterbi_kernel(llr_a, llr_b, next_state, out_a, out_b, terminated):
    n_steps = llr_a.shape[0]
    n_states = next_state.shape[0]
    ninf = -1e300
    metric = np.full(n_states, ninf)
    metric[0] = 0.0
    prev_state = np.zeros((n_steps, n_states), dtype=np.uint8)
    prev_bit = np.zeros((n_steps, n_states), dtype=np.uint8)
    for t in range(n_steps):
        new = np.full(n_states, ninf)
        la = llr_a[t]
        lb = llr_b[t]
        # Predecessors are scanned in ascending state order; strict '>' keeps
        # the smaller-index path on metric ties.
        for s in range(n_states):
            m = metric[s]
            if m <= ninf:
                continue
            for u in range(2):
                sn = next_state[s, u]
                bm = m
                bm += la if out_a[s, u] == 0 else -la
                bm += lb if out_b[s, u] == 0 else -lb
                if bm > new[sn]:
                    new[sn] = bm
                    prev_state[t, sn] = s
                    prev_bit[t, sn] = u
        metric = new
    if terminated:
        end = 0
    else:
        end = 0
        best = metric[0]
        for s in range(1, n_states):
            if metric[s] > best:
                best = metric[s]
                end = s
    bits = np.zeros(n_steps, dtype=np.uint8)
    s = end
    for t in range(n_steps - 1, -1, -1):
        bits[t] = prev_bit[t, s]
        s = prev_state[t, s]
    return bits


def viterbi_decode(
    llrs: np.ndarray, rate: Fraction, terminated: bool = True
) -> np.ndarray:
    """Maximum-likelihood decode of a punctured soft stream.

    llrs follow the positive-means-zero convention.  With terminated=True the
    trellis is assumed driven back to state 0 by tail bits (which remain in
    the returned bits).
    """
    mother = depuncture_llrs(np.asarray(llrs, dtype=np.float64), rate)
    if len(mother) % 2:
        raise ValueError("odd depunctured length")
    return _viterbi_kernel(
        mother[0::2], mother[1::2], NEXT_STATE, OUT_A, OUT_B, terminated
    )


def viterbi_decode_hard(bits: np.ndarray, rate: Fraction, terminated: bool = True) -> np.ndarray:
    """Hard-decision decode; used as an oracle-friendly mode in tests."""
    llrs = 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)
    return viterbi_decode(llrs, rate, terminated)
