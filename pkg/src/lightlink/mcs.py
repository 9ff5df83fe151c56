"""802.11n single-stream MCS table and PPDU configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction


class Modulation(Enum):
    BPSK = 1
    QPSK = 2
    QAM16 = 4
    QAM64 = 6

    @property
    def bits_per_symbol(self) -> int:
        return self.value


class Bandwidth(Enum):
    MHZ20 = 20
    MHZ40 = 40

    @property
    def sample_rate(self) -> float:
        return self.value * 1e6

    @property
    def n_fft(self) -> int:
        return 64 if self is Bandwidth.MHZ20 else 128

    @property
    def n_data_subcarriers(self) -> int:
        return 52 if self is Bandwidth.MHZ20 else 108

    @property
    def n_pilot_subcarriers(self) -> int:
        return 4 if self is Bandwidth.MHZ20 else 6


class GuardInterval(Enum):
    LONG = "long"
    SHORT = "short"

    def cp_len(self, n_fft: int) -> int:
        return n_fft // 4 if self is GuardInterval.LONG else n_fft // 8

    @property
    def symbol_duration_s(self) -> float:
        # 3.2 us FFT period plus 0.8/0.4 us cyclic prefix.
        return 4.0e-6 if self is GuardInterval.LONG else 3.6e-6


@dataclass(frozen=True)
class McsParams:
    """Modulation/coding descriptor for one single-spatial-stream MCS index."""

    index: int
    modulation: Modulation
    coding_rate: Fraction

    @property
    def n_bpsc(self) -> int:
        return self.modulation.bits_per_symbol

    def n_cbps(self, bandwidth: Bandwidth) -> int:
        return bandwidth.n_data_subcarriers * self.n_bpsc

    def n_dbps(self, bandwidth: Bandwidth) -> int:
        n = self.n_cbps(bandwidth) * self.coding_rate
        assert n.denominator == 1
        return int(n)

    def data_rate_mbps(self, bandwidth: Bandwidth, gi: GuardInterval) -> float:
        return self.n_dbps(bandwidth) / gi.symbol_duration_s / 1e6


MCS_TABLE = (
    McsParams(0, Modulation.BPSK, Fraction(1, 2)),
    McsParams(1, Modulation.QPSK, Fraction(1, 2)),
    McsParams(2, Modulation.QPSK, Fraction(3, 4)),
    McsParams(3, Modulation.QAM16, Fraction(1, 2)),
    McsParams(4, Modulation.QAM16, Fraction(3, 4)),
    McsParams(5, Modulation.QAM64, Fraction(2, 3)),
    McsParams(6, Modulation.QAM64, Fraction(3, 4)),
    McsParams(7, Modulation.QAM64, Fraction(5, 6)),
)


def mcs(index: int) -> McsParams:
    if not 0 <= index <= 7:
        raise ValueError(f"MCS index {index} outside the single-stream range 0-7")
    return MCS_TABLE[index]


# Fields preceding the payload in the data stream: 16 service bits, and the
# 6 tail bits that terminate the convolutional encoder.
N_SERVICE_BITS = 16
N_TAIL_BITS = 6
FCS_LEN = 4
PREAMBLE_DURATION_S = 16e-6
MAX_FRAME_DURATION_S = 5.484e-3


@dataclass(frozen=True)
class PpduConfig:
    mcs: McsParams
    bandwidth: Bandwidth = Bandwidth.MHZ20
    guard_interval: GuardInterval = GuardInterval.LONG
    psdu_length: int = 1000

    def __post_init__(self):
        if self.psdu_length < FCS_LEN:
            raise ValueError(f"psdu_length {self.psdu_length} < {FCS_LEN}")
        if self.duration_s > MAX_FRAME_DURATION_S:
            raise ValueError(
                f"frame duration {self.duration_s * 1e3:.3f} ms exceeds "
                f"{MAX_FRAME_DURATION_S * 1e3} ms bound"
            )

    @property
    def n_symbols(self) -> int:
        n_bits = N_SERVICE_BITS + 8 * (self.psdu_length + FCS_LEN) + N_TAIL_BITS
        return math.ceil(n_bits / self.mcs.n_dbps(self.bandwidth))

    @property
    def duration_s(self) -> float:
        return PREAMBLE_DURATION_S + self.n_symbols * self.guard_interval.symbol_duration_s

    @property
    def n_data_bits(self) -> int:
        """Length of the padded data stream fed to the encoder."""
        return self.n_symbols * self.mcs.n_dbps(self.bandwidth)
