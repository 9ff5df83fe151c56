"""PPDU generation: PSDU bytes to complex baseband waveform."""

from __future__ import annotations

import numpy as np

from lightlink.mcs import N_SERVICE_BITS, PpduConfig
from lightlink.phy import crc, interleaver, mapping, ofdm, scrambler
from lightlink.phy.convcode import conv_encode
from lightlink.waveform import Waveform

DEFAULT_SCRAMBLER_SEED = 0x5D
DEFAULT_CARRIER_HZ = 2412e6  # 2.4 GHz channel 1


def bytes_to_bits(data: bytes) -> np.ndarray:
    """LSB-first bit unpacking, the 802.11 data-field convention."""
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")


def bits_to_bytes(bits: np.ndarray) -> bytes:
    return np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little").tobytes()


def build_data_bits(psdu: bytes, cfg: PpduConfig, scrambler_seed: int) -> np.ndarray:
    """Service + PSDU(+FCS) + tail + pad, scrambled.

    Tail and pad bits are re-zeroed after scrambling so the convolutional
    encoder is driven back to the zero state by the end of the stream,
    letting the decoder run a terminated traceback.
    """
    frame = crc.append_fcs(psdu)
    payload = bytes_to_bits(frame)
    n_tail_pos = N_SERVICE_BITS + len(payload)
    stream = np.zeros(cfg.n_data_bits, dtype=np.uint8)
    stream[N_SERVICE_BITS:n_tail_pos] = payload
    stream = scrambler.scramble(stream, scrambler_seed)
    stream[n_tail_pos:] = 0
    return stream


def generate_ppdu(
    psdu: bytes,
    cfg: PpduConfig,
    scrambler_seed: int = DEFAULT_SCRAMBLER_SEED,
    carrier_hz: float = DEFAULT_CARRIER_HZ,
) -> Waveform:
    """Encode and OFDM-modulate a PSDU.

    The mean power of the data portion is 1.0 on the sample scale; absolute
    calibration is carried by Waveform.ref_power_dbm downstream.
    """
    if len(psdu) != cfg.psdu_length:
        raise ValueError(f"psdu length {len(psdu)} != configured {cfg.psdu_length}")
    spec = ofdm.grid(cfg.bandwidth)
    n_cbps = cfg.mcs.n_cbps(cfg.bandwidth)

    data_bits = build_data_bits(psdu, cfg, scrambler_seed)
    coded = conv_encode(data_bits, cfg.mcs.coding_rate)
    coded = coded.reshape(cfg.n_symbols, n_cbps)

    polarity = ofdm.pilot_polarity()
    freq = np.zeros((cfg.n_symbols, spec.n_fft), dtype=np.complex128)
    data_cols = spec.data + spec.n_fft // 2
    pilot_cols = spec.pilots + spec.n_fft // 2
    for n in range(cfg.n_symbols):
        block = interleaver.interleave(coded[n], cfg.mcs, cfg.bandwidth)
        freq[n, data_cols] = mapping.map_symbols(block, cfg.mcs.modulation)
        freq[n, pilot_cols] = spec.pilot_values * polarity[(n + 1) % 127]

    body = ofdm.modulate_grid(freq, spec, cfg.guard_interval)
    samples = np.concatenate([ofdm.preamble(cfg.bandwidth), body])
    return Waveform(
        samples=samples,
        sample_rate=cfg.bandwidth.sample_rate,
        ref_power_dbm=0.0,
        center_freq_hz=carrier_hz,
    )
