"""Monte-Carlo harness: frame-success-rate sweeps vs RSSI, maximum-distance
search, and the probe-point distortion report.

Per-trial randomness is keyed by (master seed, mcs, bandwidth, grid index,
frame index) so results are bit-identical regardless of execution order or
worker count.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from multiprocessing import Pool

import numpy as np

from lightlink.impairments import (
    ChainConfig,
    ProbeCapture,
    ProbePoint,
    chain_budget_rssi_dbm,
    run_chain,
)
from lightlink.mcs import Bandwidth, GuardInterval, PpduConfig, mcs
from lightlink.phy import generate_ppdu, ofdm, receive_ppdu
from lightlink.phy.receiver import SyncError, demodulate_frame


@dataclass(frozen=True)
class FsrPoint:
    rssi_dbm: float
    fsr: float
    n_frames: int
    n_ok: int


@dataclass(frozen=True)
class FsrCurve:
    mcs_index: int
    bandwidth_mhz: int
    points: tuple[FsrPoint, ...]
    seed: int


@dataclass(frozen=True)
class DistanceResult:
    pa_gain_db: float
    lens: bool
    mcs_index: int
    max_distance_m: float
    fsr_threshold: float
    fsr_at_result: float
    fsr_beyond: float
    undecodable: bool = False


def max_feasible_rssi_dbm(cfg: ChainConfig) -> float:
    """Received power with the optical path at unit gain; higher targets
    would require the passive optics to amplify."""
    return (
        cfg.tx_power_dbm
        - cfg.attenuator_db
        - 2 * cfg.mixer_conversion_loss_db
        + cfg.effective_pa_gain_db()
    )


def _trial_seed(master: int, mcs_index: int, bw_mhz: int, point_key: int, frame: int) -> tuple:
    # SeedSequence entropy must be non-negative; fold signed keys.
    return (master & 0xFFFFFFFF, mcs_index, bw_mhz, point_key & 0xFFFFFFFFFF, frame)


def _run_trial(args) -> bool:
    (cfg, ppdu_cfg, target_rssi, seed_tuple, frame_len) = args
    rng = np.random.default_rng(np.random.SeedSequence(seed_tuple))
    psdu = rng.integers(0, 256, frame_len, dtype=np.uint8).tobytes()
    scrambler_seed = int(rng.integers(1, 128))
    w = generate_ppdu(psdu, ppdu_cfg, scrambler_seed=scrambler_seed)
    out, _ = run_chain(w, cfg, ppdu_cfg, seed=seed_tuple + (1,), target_rssi_dbm=target_rssi)
    try:
        decoded, stats = receive_ppdu(out, ppdu_cfg)
    except SyncError:
        return False
    return bool(stats.fcs_ok and decoded == psdu)


def _run_trials(tasks, workers: int | None) -> list[bool]:
    if workers is None:
        workers = min(4, os.cpu_count() or 1)
    if workers <= 1 or len(tasks) < 8:
        return [_run_trial(t) for t in tasks]
    with Pool(workers) as pool:
        return pool.map(_run_trial, tasks, chunksize=max(1, len(tasks) // (workers * 8)))


def fsr_sweep(
    mcs_set: list[int],
    bandwidth: Bandwidth,
    rssi_grid_dbm: list[float],
    n_frames: int,
    frame_len_bytes: int,
    cfg: ChainConfig,
    seed: int,
    guard_interval: GuardInterval = GuardInterval.LONG,
    workers: int | None = None,
) -> list[FsrCurve]:
    """Monte-Carlo frame-success-rate vs target RSSI, one curve per MCS."""
    if n_frames < 1:
        raise ValueError("n_frames must be >= 1")
    if not rssi_grid_dbm:
        raise ValueError("empty RSSI grid")
    bound = max_feasible_rssi_dbm(cfg)
    for r in rssi_grid_dbm:
        if r > bound + 1e-9:
            raise ValueError(
                f"target RSSI {r} dBm above the zero-loss bound {bound:.2f} dBm"
            )
    grid_sorted = sorted(rssi_grid_dbm)
    curves = []
    for m in mcs_set:
        ppdu_cfg = PpduConfig(mcs(m), bandwidth, guard_interval, frame_len_bytes)
        tasks = []
        for gi_idx, rssi in enumerate(grid_sorted):
            key = int(round(rssi * 1000))
            for frame in range(n_frames):
                tasks.append(
                    (cfg, ppdu_cfg, rssi,
                     _trial_seed(seed, m, bandwidth.value, key, frame), frame_len_bytes)
                )
        results = _run_trials(tasks, workers)
        points = []
        for gi_idx, rssi in enumerate(grid_sorted):
            ok = sum(results[gi_idx * n_frames : (gi_idx + 1) * n_frames])
            points.append(FsrPoint(rssi, ok / n_frames, n_frames, ok))
        curves.append(FsrCurve(m, bandwidth.value, tuple(points), seed))
    return curves


def rssi_from_distance(distance_m: float, cfg: ChainConfig) -> float:
    """Receiver-input power for the configured chain at a given distance."""
    if distance_m <= 0:
        raise ValueError("distance must be > 0")
    return chain_budget_rssi_dbm(cfg, distance_m=distance_m)


def _fsr_at_distance(
    cfg, ppdu_cfg, distance_m, n_frames, frame_len, seed, variant_key, workers
) -> float:
    rssi = rssi_from_distance(distance_m, cfg)
    point_key = variant_key * 10**9 + int(round(distance_m * 1000))
    tasks = [
        (cfg, ppdu_cfg, rssi,
         _trial_seed(seed, ppdu_cfg.mcs.index, ppdu_cfg.bandwidth.value, point_key, f),
         frame_len)
        for f in range(n_frames)
    ]
    results = _run_trials(tasks, workers)
    return sum(results) / n_frames


MIN_SEARCH_DISTANCE_M = 0.05
MAX_SEARCH_DISTANCE_M = 200.0
DISTANCE_TOL_M = 0.01


def max_distance(
    variants: list[tuple[float, bool]],
    mcs_index: int,
    cfg: ChainConfig,
    fsr_threshold: float = 0.9,
    n_frames: int = 200,
    frame_len_bytes: int = 1000,
    bandwidth: Bandwidth = Bandwidth.MHZ20,
    guard_interval: GuardInterval = GuardInterval.LONG,
    seed: int = 0,
    workers: int | None = None,
) -> list[DistanceResult]:
    """Bisect the largest distance whose Monte-Carlo FSR stays at or above
    the threshold, for each (pa_gain_db, lens) variant."""
    if not 0.0 < fsr_threshold <= 1.0:
        raise ValueError("fsr_threshold must be in (0, 1]")
    ppdu_cfg = PpduConfig(mcs(mcs_index), bandwidth, guard_interval, frame_len_bytes)
    results = []
    for vi, (pa_db, lens) in enumerate(variants):
        vcfg = replace(cfg, pa_gain_db=pa_db, lens=lens)
        fsr = lambda d: _fsr_at_distance(
            vcfg, ppdu_cfg, d, n_frames, frame_len_bytes, seed, vi, workers
        )
        lo = MIN_SEARCH_DISTANCE_M
        fsr_lo = fsr(lo)
        if fsr_lo < fsr_threshold:
            results.append(
                DistanceResult(pa_db, lens, mcs_index, 0.0, fsr_threshold,
                               fsr_lo, fsr_lo, undecodable=True)
            )
            continue
        hi = lo
        fsr_hi = fsr_lo
        while fsr_hi >= fsr_threshold and hi < MAX_SEARCH_DISTANCE_M:
            hi = min(hi * 2.0, MAX_SEARCH_DISTANCE_M)
            fsr_hi = fsr(hi)
        while hi - lo > DISTANCE_TOL_M:
            mid = 0.5 * (lo + hi)
            if fsr(mid) >= fsr_threshold:
                lo = mid
            else:
                hi = mid
        results.append(
            DistanceResult(pa_db, lens, mcs_index, round(lo, 3), fsr_threshold,
                           fsr(lo), fsr(lo * 1.1))
        )
    return results


@dataclass(frozen=True)
class DistortionReport:
    captures: tuple[ProbeCapture, ...]
    per_subcarrier_dbm: dict[str, np.ndarray]
    constellations: dict[str, np.ndarray]
    predicted_points: tuple[str, ...] = ("C",)

    def table_text(self) -> str:
        header = f"{'point':<6}{'power_dbm':>11}{'noise_dbm':>11}{'snr_db':>9}{'evm_pct':>9}  note"
        lines = [header]
        for cap in self.captures:
            s = cap.stats
            evm = f"{s.evm_percent:9.2f}" if s.evm_percent is not None else f"{'---':>9}"
            note = "predicted" if cap.point.value in self.predicted_points else ""
            lines.append(
                f"{cap.point.value:<6}{s.rx_power_dbm:11.2f}{s.noise_dbm:11.2f}"
                f"{s.snr_db:9.2f}{evm}  {note}"
            )
        return "\n".join(lines)


def distortion_report(
    cfg: ChainConfig,
    ppdu_cfg: PpduConfig | None = None,
    seed: int = 0,
) -> DistortionReport:
    """Single tapped chain pass reporting per-point signal statistics,
    constellation dumps, and per-subcarrier receive power."""
    if ppdu_cfg is None:
        ppdu_cfg = PpduConfig(mcs(3), Bandwidth.MHZ20, GuardInterval.LONG, 1000)
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xD15)))
    psdu = rng.integers(0, 256, ppdu_cfg.psdu_length, dtype=np.uint8).tobytes()
    w = generate_ppdu(psdu, ppdu_cfg, scrambler_seed=int(rng.integers(1, 128)))
    _, captures = run_chain(w, cfg, ppdu_cfg, taps=tuple(ProbePoint), seed=(seed, 0xC4A1))

    per_sc = {}
    constellations = {}
    for cap in captures:
        spec_grid = ofdm.grid(ppdu_cfg.bandwidth)
        fd = demodulate_frame(cap.waveform, ppdu_cfg)
        used_cols = spec_grid.used + spec_grid.n_fft // 2
        per_sc[cap.point.value] = cap.waveform.ref_power_dbm + 10.0 * np.log10(
            np.maximum(np.mean(np.abs(fd.raw_grid[:, used_cols]) ** 2, axis=0), 1e-30)
        )
        constellations[cap.point.value] = fd.eq_data.ravel()
    return DistortionReport(
        captures=tuple(captures),
        per_subcarrier_dbm=per_sc,
        constellations=constellations,
    )


def write_fsr_csv(curves: list[FsrCurve], path: str) -> None:
    lines = ["mcs,bandwidth_mhz,rssi_dbm,n_frames,n_ok,fsr"]
    for c in curves:
        for p in c.points:
            lines.append(
                f"{c.mcs_index},{c.bandwidth_mhz},{p.rssi_dbm:g},{p.n_frames},{p.n_ok},{p.fsr:g}"
            )
    _atomic_write(path, "\n".join(lines) + "\n")


def write_distance_csv(results: list[DistanceResult], path: str) -> None:
    lines = ["pa_db,lens,mcs,max_distance_m"]
    for r in results:
        lines.append(f"{r.pa_gain_db:g},{int(r.lens)},{r.mcs_index},{r.max_distance_m:g}")
    _atomic_write(path, "\n".join(lines) + "\n")


def write_constellation_csv(report: DistortionReport, path: str) -> None:
    lines = ["tap,i,q"]
    for tap, points in report.constellations.items():
        for z in points:
            lines.append(f"{tap},{z.real:.6g},{z.imag:.6g}")
    _atomic_write(path, "\n".join(lines) + "\n")


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as f:
        f.write(text)
    os.replace(tmp, path)
