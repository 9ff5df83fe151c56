"""Gray-mapped BPSK/QPSK/16-QAM/64-QAM with unit average power, plus exact
max-log LLR demapping.

Bit order within a symbol follows the standard tables: the first half of the
bits selects the I level (MSB first), the second half the Q level.  LLRs are
positive when bit 0 is more likely.
"""

from __future__ import annotations

import numpy as np

from lightlink.mcs import Modulation

# Per-axis Gray code: index = bit word (MSB first), value = PAM level.
_GRAY_PAM = {
    1: np.array([-1.0, 1.0]),
    2: np.array([-3.0, -1.0, 3.0, 1.0]),
    3: np.array([-7.0, -5.0, -1.0, -3.0, 7.0, 5.0, 1.0, 3.0]),
}
_NORM = {
    Modulation.BPSK: 1.0,
    Modulation.QPSK: np.sqrt(2.0),
    Modulation.QAM16: np.sqrt(10.0),
    Modulation.QAM64: np.sqrt(42.0),
}


def _build(modulation: Modulation) -> tuple[np.ndarray, np.ndarray]:
    """Return (points indexed by bit word, bit table (M, n_bpsc))."""
    n = modulation.bits_per_symbol
    m = 1 << n
    words = np.arange(m)
    bit_table = ((words[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1).astype(np.uint8)
    if modulation is Modulation.BPSK:
        points = _GRAY_PAM[1][words].astype(np.complex128)
    else:
        half = n // 2
        i_bits = words >> half
        q_bits = words & ((1 << half) - 1)
        pam = _GRAY_PAM[half]
        points = pam[i_bits] + 1j * pam[q_bits]
    return points / _NORM[modulation], bit_table


_CONSTELLATIONS = {mod: _build(mod) for mod in Modulation}


def constellation(modulation: Modulation) -> np.ndarray:
    return _CONSTELLATIONS[modulation][0]


def map_symbols(bits: np.ndarray, modulation: Modulation) -> np.ndarray:
    n = modulation.bits_per_symbol
    bits = np.asarray(bits, dtype=np.uint8)
    if len(bits) % n:
        raise ValueError(f"bit count {len(bits)} not divisible by n_bpsc {n}")
    words = bits.reshape(-1, n) @ (1 << np.arange(n - 1, -1, -1))
    return _CONSTELLATIONS[modulation][0][words]


def demap_symbols(
    symbols: np.ndarray, modulation: Modulation, noise_var: np.ndarray | float
) -> np.ndarray:
    """Per-bit max-log LLRs, flattened in transmit bit order.

    noise_var may be scalar or per-symbol; it is floored to keep LLRs finite
    on noiseless input.
    """
    points, bit_table = _CONSTELLATIONS[modulation]
    symbols = np.asarray(symbols).ravel()
    nv = np.maximum(np.broadcast_to(np.asarray(noise_var, dtype=np.float64), symbols.shape), 1e-12)
    d2 = np.abs(symbols[:, None] - points[None, :]) ** 2
    n = modulation.bits_per_symbol
    llrs = np.empty((len(symbols), n))
    for b in range(n):
        mask1 = bit_table[:, b] == 1
        d0 = d2[:, ~mask1].min(axis=1)
        d1 = d2[:, mask1].min(axis=1)
        llrs[:, b] = (d1 - d0) / nv
    return llrs.ravel()


def hard_bits(llrs: np.ndarray) -> np.ndarray:
    return (np.asarray(llrs) < 0).astype(np.uint8)
