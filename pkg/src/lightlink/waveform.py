"""Complex-baseband waveform container, power bookkeeping and raw I/Q file handling.

All signal power in this package is tracked through ``Waveform.ref_power_dbm``:
a waveform whose samples have mean |s|^2 == 1 represents a signal at
``ref_power_dbm`` dBm.  Scaling the samples moves the reported power; rescaling
samples while adjusting the reference (as the AGC does) keeps it fixed.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class Waveform:
    """A stream of complex baseband samples plus calibration metadata.

    center_freq_hz is bookkeeping only: in the equivalent-baseband domain the
    samples never change representation, but mixers move the nominal center so
    that frequency plans can be validated along the chain.
    """

    samples: np.ndarray
    sample_rate: float
    ref_power_dbm: float = 0.0
    center_freq_hz: float = 0.0

    @property
    def n_samples(self) -> int:
        return len(self.samples)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate

    def mean_power(self) -> float:
        return float(np.mean(np.abs(self.samples) ** 2))

    def power_dbm(self) -> float:
        return self.ref_power_dbm + 10.0 * np.log10(max(self.mean_power(), 1e-300))


def scale_db(w: Waveform, gain_db: float) -> Waveform:
    """Scale sample amplitudes by gain_db; reported power moves by gain_db."""
    return replace(w, samples=w.samples * 10.0 ** (gain_db / 20.0))


def with_power_dbm(w: Waveform, target_dbm: float) -> Waveform:
    """Scale samples so the reported power equals target_dbm."""
    return scale_db(w, target_dbm - w.power_dbm())


def add_noise_dbm(w: Waveform, noise_dbm: float, rng: np.random.Generator) -> Waveform:
    """Add complex white Gaussian noise with total power noise_dbm (dBm).

    The noise power is spread across the full sampled band; noise_dbm is the
    total (full-band) noise power on the waveform's dBm scale.
    """
    var = 10.0 ** ((noise_dbm - w.ref_power_dbm) / 10.0)
    sigma = np.sqrt(var / 2.0)
    n = sigma * (rng.standard_normal(len(w.samples)) + 1j * rng.standard_normal(len(w.samples)))
    return replace(w, samples=w.samples + n)


def add_inband_noise_dbm(
    w: Waveform, inband_noise_dbm: float, occupied_fraction: float, rng: np.random.Generator
) -> Waveform:
    """Add white noise sized so the power falling inside the occupied band is
    inband_noise_dbm.  occupied_fraction = n_used_subcarriers / n_fft."""
    total = inband_noise_dbm - 10.0 * np.log10(occupied_fraction)
    return add_noise_dbm(w, total, rng)


def wiener_phase_noise(
    w: Waveform, var_per_sample: float, rng: np.random.Generator, ref_rate: float = 20e6
) -> Waveform:
    """Apply a Wiener (random-walk) phase noise process.

    var_per_sample is referenced to ref_rate so the same physical oscillator
    quality is applied regardless of the waveform sample rate.
    """
    if var_per_sample <= 0.0:
        return w
    var = var_per_sample * (ref_rate / w.sample_rate)
    steps = rng.standard_normal(len(w.samples)) * np.sqrt(var)
    phase = np.cumsum(steps)
    return replace(w, samples=w.samples * np.exp(1j * phase))




def write_iq(w: Waveform, path: str) -> None:
    """Write raw interleaved float32 I/Q (little-endian) plus a JSON sidecar.

    The raw file is loadable by common SDR tools as complex float32; the
    sidecar <path>.json carries sample rate and the dBm calibration reference.
    """
    flat = np.empty(2 * len(w.samples), dtype="<f4")
    flat[0::2] = w.samples.real
    flat[1::2] = w.samples.imag
    tmp = path + ".tmp"
    flat.tofile(tmp)
    os.replace(tmp, path)
    sidecar = {
        "sample_rate_hz": w.sample_rate,
        "ref_power_dbm": w.ref_power_dbm,
        "center_freq_hz": w.center_freq_hz,
        "n_samples": len(w.samples),
        "format": "cf32_le",
    }
    tmp = path + ".json.tmp"
    with open(tmp, "w") as f:
        json.dump(sidecar, f, indent=1)
    os.replace(tmp, path + ".json")


def read_iq(path: str) -> Waveform:
    with open(path + ".json") as f:
        sidecar = json.load(f)
    flat = np.fromfile(path, dtype="<f4")
    if flat.size == 0 or flat.size % 2:
        raise ValueError(f"{path}: truncated or empty I/Q file")
    samples = flat[0::2].astype(np.float64) + 1j * flat[1::2].astype(np.float64)
    if not np.all(np.isfinite(samples)):
        raise ValueError(f"{path}: non-finite samples")
    return Waveform(
        samples=samples,
        sample_rate=float(sidecar["sample_rate_hz"]),
        ref_power_dbm=float(sidecar["ref_power_dbm"]),
        center_freq_hz=float(sidecar.get("center_freq_hz", 0.0)),
    )
