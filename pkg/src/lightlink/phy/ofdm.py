"""OFDM subcarrier plans, training fields, and (de)modulation helpers.

Frequency-domain grids use FFT-shifted logical indices (-N/2 .. N/2-1).
Time-domain scaling is chosen so that a symbol whose used subcarriers carry
unit-power constellation points has unit mean time-domain power.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from lightlink.mcs import Bandwidth, GuardInterval
from lightlink.phy.scrambler import keystream

# 802.11 long training sequence, subcarriers -26..26.
_LTS_26 = np.array(
    [1, 1, -1, -1, 1, 1, -1, 1, -1, 1, 1, 1, 1, 1, 1, -1, -1, 1, 1, -1, 1, -1, 1, 1, 1, 1, 0,
     1, -1, -1, 1, 1, -1, 1, -1, 1, -1, -1, -1, -1, -1, 1, 1, -1, -1, 1, -1, 1, -1, 1, 1, 1, 1],
    dtype=np.float64,
)
# HT extension adds +-27, +-28 tones.
_LTS_28 = np.concatenate(([1.0, 1.0], _LTS_26, [-1.0, -1.0]))

# Short training tones: every 4th subcarrier between -24 and 24.
_STS_TONES = {
    -24: 1 + 1j, -20: -1 - 1j, -16: 1 + 1j, -12: -1 - 1j, -8: -1 - 1j, -4: 1 + 1j,
    4: -1 - 1j, 8: -1 - 1j, 12: 1 + 1j, 16: 1 + 1j, 20: 1 + 1j, 24: 1 + 1j,
}

N_LTF_SYMBOLS = 2


@dataclass(frozen=True)
class GridSpec:
    n_fft: int
    used: np.ndarray      # logical indices of all occupied subcarriers
    data: np.ndarray      # logical indices of data subcarriers
    pilots: np.ndarray    # logical indices of pilot subcarriers
    pilot_values: np.ndarray
    ltf_values: np.ndarray  # training values on `used`, ascending index order

    @property
    def n_used(self) -> int:
        return len(self.used)

    @property
    def nulls(self) -> np.ndarray:
        """Guard bins used for noise estimation: every unoccupied bin except
        the DC region, which real receivers avoid for offset reasons."""
        all_bins = np.arange(-self.n_fft // 2, self.n_fft // 2)
        unused = np.setdiff1d(all_bins, self.used)
        return unused[np.abs(unused) > 1]

    def data_positions(self) -> np.ndarray:
        """Positions of data subcarriers within the `used` array."""
        return np.searchsorted(self.used, self.data)

    def pilot_positions(self) -> np.ndarray:
        return np.searchsorted(self.used, self.pilots)


@lru_cache(maxsize=None)
def grid(bandwidth: Bandwidth) -> GridSpec:
    if bandwidth is Bandwidth.MHZ20:
        used = np.setdiff1d(np.arange(-28, 29), [0])
        pilots = np.array([-21, -7, 7, 21])
        pilot_values = np.array([1.0, 1.0, 1.0, -1.0])
        ltf = _LTS_28.copy()
        ltf_used = ltf[np.abs(np.arange(-28, 29)) > 0]
    else:
        used = np.concatenate([np.arange(-58, -1), np.arange(2, 59)])
        pilots = np.array([-53, -25, -11, 11, 25, 53])
        pilot_values = np.array([1.0, 1.0, 1.0, -1.0, -1.0, 1.0])
        # Duplicate the 20 MHz training sequence onto both 57-bin halves;
        # its DC hole lands on a used bin here and must carry a tone.
        half = _LTS_28.copy()
        half[len(half) // 2] = 1.0
        ltf_used = np.concatenate([half, half])
    data = np.setdiff1d(used, pilots)
    return GridSpec(
        n_fft=bandwidth.n_fft,
        used=used,
        data=data,
        pilots=pilots,
        pilot_values=pilot_values,
        ltf_values=ltf_used,
    )


@lru_cache(maxsize=None)
def pilot_polarity() -> np.ndarray:
    """127-periodic pilot polarity sequence (all-ones scrambler keystream)."""
    return 1.0 - 2.0 * keystream(0b1111111, 127).astype(np.float64)


def _ifft_scale(spec: GridSpec) -> float:
    return spec.n_fft / np.sqrt(spec.n_used)


def modulate_grid(freq: np.ndarray, spec: GridSpec, gi: GuardInterval) -> np.ndarray:
    """IFFT rows of a (n_sym, n_fft) shifted-grid array and prepend prefixes."""
    t = np.fft.ifft(np.fft.ifftshift(freq, axes=-1), axis=-1) * _ifft_scale(spec)
    cp = gi.cp_len(spec.n_fft)
    return np.concatenate([t[:, -cp:], t], axis=1).ravel()


def demodulate_symbols(
    samples: np.ndarray, n_sym: int, spec: GridSpec, gi: GuardInterval
) -> np.ndarray:
    """Inverse of modulate_grid; returns (n_sym, n_fft) shifted-grid values."""
    cp = gi.cp_len(spec.n_fft)
    sym_len = spec.n_fft + cp
    blocks = samples[: n_sym * sym_len].reshape(n_sym, sym_len)[:, cp:]
    return np.fft.fftshift(np.fft.fft(blocks, axis=-1), axes=-1) / _ifft_scale(spec)


def _to_grid(values: np.ndarray, indices: np.ndarray, n_fft: int) -> np.ndarray:
    g = np.zeros(n_fft, dtype=np.complex128)
    g[indices + n_fft // 2] = values
    return g


def build_ltf(bandwidth: Bandwidth) -> np.ndarray:
    """Long training field: cyclic prefix plus two repeated symbols.

    Kept at the natural subcarrier scale (not re-normalized) so the receiver's
    division by the known training values recovers the channel exactly.
    """
    spec = grid(bandwidth)
    g = _to_grid(spec.ltf_values, spec.used, spec.n_fft)
    sym = np.fft.ifft(np.fft.ifftshift(g)) * _ifft_scale(spec)
    return np.concatenate([sym[-spec.n_fft // 2:], sym, sym])


def build_stf(bandwidth: Bandwidth) -> np.ndarray:
    """Short training field: 10 repetitions of the quarter-symbol pattern."""
    spec = grid(bandwidth)
    g = np.zeros(spec.n_fft, dtype=np.complex128)
    offsets = (0,) if bandwidth is Bandwidth.MHZ20 else (-32, 32)
    for off in offsets:
        for k, v in _STS_TONES.items():
            g[k + off + spec.n_fft // 2] = v
    sym = np.fft.ifft(np.fft.ifftshift(g))
    field = np.concatenate([sym, sym, sym[: spec.n_fft // 2]])
    return field / np.sqrt(np.mean(np.abs(field) ** 2))


@lru_cache(maxsize=None)
def preamble(bandwidth: Bandwidth) -> np.ndarray:
    return np.concatenate([build_stf(bandwidth), build_ltf(bandwidth)])


def ltf_slice(bandwidth: Bandwidth) -> slice:
    """Sample positions of the two LTF symbols inside the preamble."""
    n_fft = bandwidth.n_fft
    stf_len = n_fft * 2 + n_fft // 2
    start = stf_len + n_fft // 2  # skip the LTF cyclic prefix
    return slice(start, start + N_LTF_SYMBOLS * n_fft)
