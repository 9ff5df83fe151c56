"""Analog chain model: NIC TX output, attenuator, mixers, power amplifier,
LED/optical path, photodiode, AGC, with capture taps at probe points A-E.

Signal flow (equivalent-baseband):

    [NIC TX] -A-> attenuator -> down-mixer -B-> PA -C-> LED/optical/PD -D->
    up-mixer -E-> AGC -> NIC RX

Samples stay complex baseband throughout; mixers translate the nominal
center-frequency metadata and apply loss plus oscillator phase noise.  The
optical segment is a frequency-flat gain plus the photodiode noise floor
(receiver-input referred); an IF-passband mode models LED bias and
non-negativity explicitly to validate that shortcut.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from lightlink.mcs import Bandwidth, PpduConfig
from lightlink.phy import ofdm
from lightlink.phy.receiver import SyncError, demodulate_frame, evm_percent
from lightlink.waveform import (
    Waveform,
    add_inband_noise_dbm,
    scale_db,
    wiener_phase_noise,
    with_power_dbm,
)


class FrequencyPlanError(Exception):
    """IF band does not fit the optical front-end."""


class ProbePoint(Enum):
    A = "A"  # NIC RF output
    B = "B"  # after attenuator + down-mixer
    C = "C"  # after power amplifier
    D = "D"  # optical link output at the photodiode/TIA
    E = "E"  # after up-mixer, at the RX NIC input


# Per-MCS transmit quality, relative to the configured MCS 3 reference EVM.
# NICs run their TX chain dirtier at robust rates and back off for 64-QAM,
# so the angular constellation blur shrinks with MCS while a small residual
# error-vector floor remains.  Both tables are fitted: the dither against the
# probe-A distortion measurement, the floor against the rate-vs-RSSI results.
TX_DITHER_MCS_SCALE = (1.33, 1.33, 1.15, 1.0, 0.71, 0.2, 0.2, 0.2)
TX_FLOOR_MCS_SCALE = (0.0, 0.0, 0.0, 0.0, 0.0, 0.6, 0.6, 0.6)

# The PA saturates at a fixed output level: this is its clipping headroom
# (dB above mean power) when run at unity gain.  Driving it with +20 dB of
# gain leaves the operating point 2 dB past saturation, which is what ruins
# QAM constellations in the high-gain configurations.
PA_SAT_HEADROOM_DB = 18.0


@dataclass(frozen=True)
class ChainConfig:
    """Full parameterization of the analog TX -> optical -> RX pipeline.

    Power bookkeeping: tx_power_dbm calibrates the NIC output (probe A); all
    stage noise floors are in-band dBm on the same absolute scale.
    pd_noise_floor_dbm is referred to the receiver NIC input (probe E) in a
    20 MHz channel; a 40 MHz channel raises it by 3 dB.
    """

    attenuator_db: float = 15.0
    mixer_conversion_loss_db: float = 5.6
    lo_tx_hz: float = 2375e6
    lo_rx_hz: float = 2400e6
    pa_gain_db: float = 0.0
    pa_clip_backoff_db: float | None = 30.0
    pa_model: str = "hard"
    led_bias: float = 0.5
    led_clip: bool = True
    led_drive_rms: float = 0.12
    distance_m: float = 0.5
    lens: bool = False
    lens_gain_db: float = 3.0
    pd_noise_floor_dbm: float = -60.0
    phase_noise_var: float = 1.0e-5
    agc_target_power: float = 1.0
    frontend_bw_hz: float = 100e6
    tx_power_dbm: float = 10.0
    tx_noise_dbm: float = -19.8
    tx_phase_noise_var: float = 1.0e-5
    tx_evm_pct: float = 10.2
    mixer_noise_dbm: float = -44.5
    rx_nic_noise_share: float = 0.2
    led_sat_gain_db: float = 3.0
    path_loss_ref_db: float = 18.3
    path_loss_ref_distance_m: float = 0.25
    optical_mode: str = "baseband"

    def __post_init__(self):
        if self.attenuator_db < 0:
            raise ValueError("attenuator_db must be >= 0")
        if self.mixer_conversion_loss_db < 0:
            raise ValueError("mixer_conversion_loss_db must be >= 0")
        if self.distance_m <= 0:
            raise ValueError("distance_m must be > 0")
        if self.frontend_bw_hz <= 0:
            raise ValueError("frontend_bw_hz must be > 0")
        if not 0.0 <= self.led_bias <= 1.0:
            raise ValueError("led_bias must be in [0, 1]")
        if self.pa_gain_db < 0:
            raise ValueError("pa_gain_db must be >= 0 (the PA does not attenuate)")
        if self.optical_mode not in ("baseband", "passband"):
            raise ValueError(f"unknown optical_mode {self.optical_mode!r}")
        if not 0.0 <= self.rx_nic_noise_share < 1.0:
            raise ValueError("rx_nic_noise_share must be in [0, 1)")

    def noise_floor_dbm(self, bandwidth: Bandwidth) -> float:
        extra = 3.0 if bandwidth is Bandwidth.MHZ40 else 0.0
        return self.pd_noise_floor_dbm + extra

    def effective_pa_gain_db(self) -> float:
        """Radiated-power increase from PA drive; the LED drive saturates."""
        return min(self.pa_gain_db, self.led_sat_gain_db)

    def tx_dither_sigma(self, mcs_index: int) -> float:
        """Tangential constellation-dither stddev (radians) for one MCS."""
        return self.tx_evm_pct / 100.0 * TX_DITHER_MCS_SCALE[mcs_index]

    def tx_floor_sigma(self, mcs_index: int) -> float:
        """Additive TX error-vector floor (relative to symbol rms)."""
        return self.tx_evm_pct / 100.0 * TX_FLOOR_MCS_SCALE[mcs_index]

    def effective_clip_backoff_db(self) -> float:
        """Clipping onset relative to the amplified mean power: the lesser of
        the configured backoff and what the PA's fixed saturation point
        leaves after applying the gain."""
        if self.pa_clip_backoff_db is None:
            return PA_SAT_HEADROOM_DB - self.pa_gain_db
        return min(self.pa_clip_backoff_db, PA_SAT_HEADROOM_DB - self.pa_gain_db)


@dataclass(frozen=True)
class ProbeStatsResult:
    rx_power_dbm: float
    noise_dbm: float
    snr_db: float
    evm_percent: float | None


@dataclass(frozen=True)
class ProbeCapture:
    point: ProbePoint
    waveform: Waveform
    stats: ProbeStatsResult


def attenuate(w: Waveform, db: float) -> Waveform:
    """Passive attenuation: reported power drops by exactly db."""
    if db < 0:
        raise ValueError("attenuation must be >= 0 dB; use amplify_clip for gain")
    return scale_db(w, -db)


def amplify_clip(
    w: Waveform,
    gain_db: float,
    clip_backoff_db: float | None = None,
    model: str = "hard",
) -> Waveform:
    """Amplify, limiting instantaneous magnitude to
    A_max = mean amplitude * 10^(clip_backoff_db/20); phase is preserved.

    clip_backoff_db=None gives a pure linear gain.
    """
    if gain_db < 0:
        raise ValueError("gain must be >= 0 dB")
    out = scale_db(w, gain_db)
    if clip_backoff_db is None:
        return out
    mag = np.abs(out.samples)
    a_max = float(np.mean(mag)) * 10.0 ** (clip_backoff_db / 20.0)
    if a_max <= 0:
        return out
    if model == "hard":
        factor = np.minimum(mag, a_max) / np.maximum(mag, 1e-30)
    elif model == "rapp":
        p = 2.0
        factor = (1.0 + (mag / a_max) ** (2 * p)) ** (-1.0 / (2 * p))
    else:
        raise ValueError(f"unknown clip model {model!r}")
    return replace(out, samples=out.samples * factor)


def mix(
    w: Waveform,
    lo_hz: float,
    direction: str,
    conversion_loss_db: float = 0.0,
    phase_noise_var: float = 0.0,
    rng: np.random.Generator | None = None,
    frontend_bw_hz: float | None = None,
    noise_floor_dbm: float | None = None,
    occupied_fraction: float = 0.875,
) -> Waveform:
    """Frequency translation with conversion loss and Wiener LO phase noise.

    In the equivalent-baseband domain the samples keep their complex
    representation; the nominal center frequency moves by the LO.  When
    down-converting against a front-end bandwidth, the resulting IF band must
    fit inside [0, frontend_bw_hz].
    """
    if direction not in ("up", "down"):
        raise ValueError(f"direction must be 'up' or 'down', got {direction!r}")
    if conversion_loss_db < 0:
        raise ValueError("conversion loss must be >= 0 dB")
    new_center = w.center_freq_hz - lo_hz if direction == "down" else w.center_freq_hz + lo_hz
    if direction == "down":
        half_bw = w.sample_rate / 2
        limit = frontend_bw_hz if frontend_bw_hz is not None else math.inf
        if new_center - half_bw < 0 or new_center + half_bw > limit:
            raise FrequencyPlanError(
                f"IF band {(new_center - half_bw) / 1e6:.1f}.."
                f"{(new_center + half_bw) / 1e6:.1f} MHz outside front-end "
                f"range 0..{limit / 1e6:.1f} MHz"
            )
    out = replace(scale_db(w, -conversion_loss_db), center_freq_hz=new_center)
    if phase_noise_var > 0.0:
        if rng is None:
            raise ValueError("phase noise requires an rng")
        out = wiener_phase_noise(out, phase_noise_var, rng)
    if noise_floor_dbm is not None and noise_floor_dbm > -200.0:
        if rng is None:
            raise ValueError("additive noise requires an rng")
        out = add_inband_noise_dbm(out, noise_floor_dbm, occupied_fraction, rng)
    return out


def path_loss_db(
    distance_m: float, lens: bool, pa_gain_db: float, cfg: ChainConfig
) -> float:
    """Fitted line-of-sight optical link loss.

    Inverse-square in distance, reduced by the lens gain; PA drive beyond the
    LED saturation point is absorbed here as excess loss (the radiated power
    stops growing even though the electrical drive does).
    """
    if distance_m <= 0:
        raise ValueError("distance must be > 0")
    loss = cfg.path_loss_ref_db + 20.0 * math.log10(distance_m / cfg.path_loss_ref_distance_m)
    if lens:
        loss -= cfg.lens_gain_db
    loss += pa_gain_db - min(pa_gain_db, cfg.led_sat_gain_db)
    return loss


def chain_budget_rssi_dbm(cfg: ChainConfig, distance_m: float | None = None) -> float:
    """Pre-AGC received power at probe E under the configured link budget."""
    d = cfg.distance_m if distance_m is None else distance_m
    return (
        cfg.tx_power_dbm
        - cfg.attenuator_db
        - 2 * cfg.mixer_conversion_loss_db
        + cfg.pa_gain_db
        - path_loss_db(d, cfg.lens, cfg.pa_gain_db, cfg)
    )


def _led_passband(w: Waveform, cfg: ChainConfig) -> Waveform:
    """Real-IF validation path: bias the drive, clip negative excursions at
    the LED, and return to equivalent baseband."""
    rate = 200e6
    r = int(round(rate / w.sample_rate))
    n = len(w.samples)
    spec = np.fft.fft(w.samples)
    up = np.zeros(n * r, dtype=np.complex128)
    up[: n // 2] = spec[: n // 2]
    up[-(n - n // 2):] = spec[n // 2:]
    x = np.fft.ifft(up) * r

    t = np.arange(n * r) / rate
    carrier = np.exp(2j * np.pi * w.center_freq_hz * t)
    p = np.sqrt(2.0) * (x * carrier).real
    rms = float(np.sqrt(np.mean(p**2)))
    if rms <= 0:
        return w
    drive = cfg.led_bias + cfg.led_drive_rms * p / rms
    if cfg.led_clip:
        drive = np.maximum(drive, 0.0)
    ac = (drive - cfg.led_bias) * rms / cfg.led_drive_rms

    y = np.sqrt(2.0) * ac * np.conj(carrier)
    spec_y = np.fft.fft(y)
    down = np.zeros(n, dtype=np.complex128)
    down[: n // 2] = spec_y[: n // 2]
    down[-(n - n // 2):] = spec_y[-(n - n // 2):]
    samples = np.fft.ifft(down) / r
    return replace(w, samples=samples)


def led_channel(
    w: Waveform,
    cfg: ChainConfig,
    rng: np.random.Generator,
    bandwidth: Bandwidth,
    target_power_dbm: float | None = None,
) -> Waveform:
    """Optical segment: frequency-flat link gain plus the photodiode/TIA part
    of the receiver noise floor.

    target_power_dbm sets the output (probe D) power; by default it follows
    the configured distance budget.  The noise floor is receiver-input
    referred: the portion injected here arrives at probe E, together with the
    NIC front-end contribution added after the up-mixer, at exactly the
    configured level.
    """
    if not 0.0 <= cfg.led_bias <= 1.0:
        raise ValueError("led_bias out of range")
    if cfg.optical_mode == "passband":
        w = _led_passband(w, cfg)
    if target_power_dbm is None:
        # Budget mode: the optical segment is a fixed gain.
        out = scale_db(w, -path_loss_db(cfg.distance_m, cfg.lens, cfg.pa_gain_db, cfg))
    else:
        # Target mode: solve the link gain so the output power is pinned.
        out = with_power_dbm(w, target_power_dbm)
    floor = cfg.noise_floor_dbm(bandwidth)
    if floor > -200.0 and cfg.rx_nic_noise_share < 1.0:
        pd_part = floor + 10.0 * math.log10(1.0 - cfg.rx_nic_noise_share)
        spec = ofdm.grid(bandwidth)
        out = add_inband_noise_dbm(
            out, pd_part + cfg.mixer_conversion_loss_db, spec.n_used / spec.n_fft, rng
        )
    return out


def tx_constellation_error(
    w: Waveform,
    ppdu_cfg: PpduConfig,
    dither_sigma: float,
    floor_sigma: float,
    rng: np.random.Generator,
) -> Waveform:
    """NIC transmit-chain constellation error, applied per symbol and per
    occupied subcarrier: a tangential (phase-direction) rotation of stddev
    dither_sigma plus an additive error vector of rms floor_sigma relative
    to the symbol magnitude scale.

    Being symbol-synchronous it blurs the constellation the way oscillator
    noise and modulator error do, without raising the guard-band noise
    floor; the training fields are left clean.
    """
    if dither_sigma <= 0.0 and floor_sigma <= 0.0:
        return w
    spec = ofdm.grid(ppdu_cfg.bandwidth)
    cp = ppdu_cfg.guard_interval.cp_len(spec.n_fft)
    pre = len(ofdm.preamble(ppdu_cfg.bandwidth))
    n_sym = ppdu_cfg.n_symbols
    body_len = n_sym * (spec.n_fft + cp)
    body = w.samples[pre : pre + body_len].reshape(n_sym, spec.n_fft + cp)
    cores = np.fft.fft(body[:, cp:], axis=-1)
    used_cols = np.fft.ifftshift(np.arange(spec.n_fft))[spec.used + spec.n_fft // 2]
    shape = (n_sym, spec.n_used)
    vals = cores[:, used_cols]
    if dither_sigma > 0.0:
        vals = vals * np.exp(1j * rng.normal(0.0, dither_sigma, shape))
    if floor_sigma > 0.0:
        rms = np.sqrt(np.mean(np.abs(vals) ** 2))
        noise = rng.normal(0.0, 1.0, shape) + 1j * rng.normal(0.0, 1.0, shape)
        vals = vals + noise * (rms * floor_sigma / np.sqrt(2.0))
    cores[:, used_cols] = vals
    new_body = np.fft.ifft(cores, axis=-1)
    out = w.samples.copy()
    out[pre : pre + body_len] = np.concatenate(
        [new_body[:, -cp:], new_body], axis=1
    ).ravel()
    return replace(w, samples=out)


def agc_normalize(w: Waveform, target_power: float = 1.0) -> Waveform:
    """Scale samples to the target mean power; the dBm reference absorbs the
    gain so reported power still reflects the pre-AGC level."""
    p = w.mean_power()
    if p <= 0:
        raise ValueError("AGC cannot normalize an all-zero waveform")
    gain_db = 10.0 * math.log10(target_power / p)
    return replace(
        w,
        samples=w.samples * 10.0 ** (gain_db / 20.0),
        ref_power_dbm=w.ref_power_dbm - gain_db,
    )


def probe_stats(
    w: Waveform, ppdu_cfg: PpduConfig, reference: Waveform | None = None
) -> ProbeStatsResult:
    """Power / noise / SNR / EVM at a tap, all via the receiver's estimators.

    EVM is measured against the demodulated reference waveform and omitted if
    the training fields are unusable.
    """
    evm = None
    try:
        fd = demodulate_frame(w, ppdu_cfg)
        rssi, noise = fd.rssi_dbm, fd.noise_dbm
        if reference is not None:
            ref_fd = demodulate_frame(reference, ppdu_cfg)
            evm = evm_percent(fd.eq_data, ref_fd.eq_data)
    except SyncError:
        spec = ofdm.grid(ppdu_cfg.bandwidth)
        n_sym = max(len(w.samples) // (spec.n_fft + ppdu_cfg.guard_interval.cp_len(spec.n_fft)), 1)
        raw = ofdm.demodulate_symbols(w.samples, n_sym, spec, ppdu_cfg.guard_interval)
        used = spec.used + spec.n_fft // 2
        nulls = spec.nulls + spec.n_fft // 2
        rssi = w.ref_power_dbm + 10 * np.log10(max(float(np.mean(np.abs(raw[:, used]) ** 2)), 1e-30))
        noise = w.ref_power_dbm + 10 * np.log10(max(float(np.mean(np.abs(raw[:, nulls]) ** 2)), 1e-30))
    return ProbeStatsResult(
        rx_power_dbm=rssi, noise_dbm=noise, snr_db=rssi - noise, evm_percent=evm
    )


def run_chain(
    w: Waveform,
    cfg: ChainConfig,
    ppdu_cfg: PpduConfig,
    taps: tuple[ProbePoint, ...] = (),
    seed: int | tuple = 0,
    target_rssi_dbm: float | None = None,
) -> tuple[Waveform, list[ProbeCapture]]:
    """Drive a PPDU through the full analog chain.

    target_rssi_dbm overrides the distance budget by solving the optical gain
    so the pre-AGC power at probe E matches the target.  Deterministic for a
    fixed (waveform, cfg, seed).
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    spec = ofdm.grid(ppdu_cfg.bandwidth)
    frac = spec.n_used / spec.n_fft
    reference = w

    # NIC TX stage: absolute power calibration, constellation blur, slow
    # oscillator wander, and the transmit noise floor.
    w = replace(w, ref_power_dbm=cfg.tx_power_dbm)
    w = tx_constellation_error(
        w,
        ppdu_cfg,
        cfg.tx_dither_sigma(ppdu_cfg.mcs.index),
        cfg.tx_floor_sigma(ppdu_cfg.mcs.index),
        rng,
    )
    w = wiener_phase_noise(w, cfg.tx_phase_noise_var, rng)
    w = add_inband_noise_dbm(w, cfg.tx_noise_dbm, frac, rng)

    captures: list[ProbeCapture] = []

    def tap(point: ProbePoint, wf: Waveform):
        if point in taps:
            ref = replace(reference, ref_power_dbm=wf.ref_power_dbm)
            captures.append(ProbeCapture(point, wf, probe_stats(wf, ppdu_cfg, ref)))

    tap(ProbePoint.A, w)
    w = attenuate(w, cfg.attenuator_db)
    w = mix(
        w,
        cfg.lo_tx_hz,
        "down",
        conversion_loss_db=cfg.mixer_conversion_loss_db,
        phase_noise_var=cfg.phase_noise_var,
        rng=rng,
        frontend_bw_hz=cfg.frontend_bw_hz,
        noise_floor_dbm=cfg.mixer_noise_dbm,
        occupied_fraction=frac,
    )
    tap(ProbePoint.B, w)
    w = amplify_clip(w, cfg.pa_gain_db, cfg.effective_clip_backoff_db(), cfg.pa_model)
    tap(ProbePoint.C, w)
    target_d = None
    if target_rssi_dbm is not None:
        target_d = target_rssi_dbm + cfg.mixer_conversion_loss_db
    w = led_channel(w, cfg, rng, ppdu_cfg.bandwidth, target_power_dbm=target_d)
    tap(ProbePoint.D, w)
    w = mix(
        w,
        cfg.lo_rx_hz,
        "up",
        conversion_loss_db=cfg.mixer_conversion_loss_db,
        phase_noise_var=cfg.phase_noise_var,
        rng=rng,
    )
    floor = cfg.noise_floor_dbm(ppdu_cfg.bandwidth)
    if floor > -200.0 and cfg.rx_nic_noise_share > 0.0:
        # NIC front-end contribution to the receiver noise floor.
        w = add_inband_noise_dbm(
            w, floor + 10.0 * math.log10(cfg.rx_nic_noise_share), frac, rng
        )
    tap(ProbePoint.E, w)
    w = agc_normalize(w, cfg.agc_target_power)
    return w, captures
