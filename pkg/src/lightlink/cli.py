"""Command-line interface: frequency planning, FSR sweeps, distance search,
probe-point reports, and the PHY loopback self-test.

Exit codes: 0 success, 1 usage error, 2 infeasible plan/config, 3 internal
error.  Every experiment run writes its fully resolved configuration next to
its outputs, and that file reloads to an identical run.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import os
import sys
import time

import numpy as np

from lightlink import experiments, freqplan
from lightlink.impairments import ChainConfig, FrequencyPlanError
from lightlink.mcs import Bandwidth, GuardInterval, PpduConfig, mcs
from lightlink.phy import generate_ppdu, receive_ppdu
from lightlink.waveform import write_iq

OUTDIR_ENV = "LIGHTLINK_OUTDIR"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_INTERNAL = 3

DEFAULT_RSSI_GRID = [-60.0 + 2.5 * i for i in range(17)]  # -60 .. -20 dBm
DEFAULT_DISTANCE_VARIANTS = [(0.0, False), (20.0, False), (20.0, True)]


@dataclasses.dataclass
class RunConfig:
    chain: ChainConfig = dataclasses.field(default_factory=ChainConfig)
    plan: freqplan.FrequencyPlan = dataclasses.field(
        default_factory=lambda: freqplan.plan(1, 6, 20, 100.0, 37.0)
    )
    mcs_set: tuple[int, ...] = tuple(range(8))
    bandwidths_mhz: tuple[int, ...] = (20, 40)
    guard_interval: str = "long"
    frame_len_bytes: int = 1000
    n_frames: int = 1000
    rssi_grid_dbm: tuple[float, ...] = tuple(DEFAULT_RSSI_GRID)
    distance_variants: tuple[tuple[float, bool], ...] = tuple(DEFAULT_DISTANCE_VARIANTS)
    distance_mcs_set: tuple[int, ...] = (0, 3, 7)
    fsr_threshold: float = 0.9
    seed: int = 1


def _format_value(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v) if isinstance(v, float) else str(v)


def _parse_like(text: str, template):
    if text == "none":
        return None
    if isinstance(template, bool):
        return text == "true"
    if isinstance(template, int) and not isinstance(template, bool):
        return int(text)
    if isinstance(template, float) or template is None:
        return float(text)
    return text


def save_config(cfg: RunConfig, path: str) -> None:
    cp = configparser.ConfigParser()
    cp["run"] = {
        "seed": str(cfg.seed),
        "mcs_set": ",".join(map(str, cfg.mcs_set)),
        "bandwidths_mhz": ",".join(map(str, cfg.bandwidths_mhz)),
        "guard_interval": cfg.guard_interval,
        "frame_len_bytes": str(cfg.frame_len_bytes),
        "n_frames": str(cfg.n_frames),
        "rssi_grid_dbm": ",".join(repr(r) for r in cfg.rssi_grid_dbm),
        "distance_variants": ";".join(f"{p:g},{int(l)}" for p, l in cfg.distance_variants),
        "distance_mcs_set": ",".join(map(str, cfg.distance_mcs_set)),
        "fsr_threshold": repr(cfg.fsr_threshold),
    }
    cp["chain"] = {
        f.name: _format_value(getattr(cfg.chain, f.name))
        for f in dataclasses.fields(ChainConfig)
    }
    cp["plan"] = {
        "tx_channel": str(cfg.plan.wifi_channel_tx),
        "rx_channel": str(cfg.plan.wifi_channel_rx),
        "channel_bw_mhz": str(cfg.plan.channel_bw_mhz),
        "frontend_bw_mhz": repr(cfg.plan.frontend_bw_mhz),
        "if_center_mhz": repr(cfg.plan.if_center_mhz),
    }
    tmp = path + ".tmp"
    with open(tmp, "w") as f:
        cp.write(f)
    os.replace(tmp, path)


def load_config(path: str) -> RunConfig:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise FileNotFoundError(path)
    base = RunConfig()
    run = cp["run"]
    chain_kwargs = {}
    defaults = ChainConfig()
    for f in dataclasses.fields(ChainConfig):
        if f.name in cp["chain"]:
            template = getattr(defaults, f.name)
            chain_kwargs[f.name] = _parse_like(cp["chain"][f.name], template)
    plan_sec = cp["plan"]
    plan = freqplan.plan(
        int(plan_sec["tx_channel"]),
        int(plan_sec["rx_channel"]),
        int(plan_sec["channel_bw_mhz"]),
        float(plan_sec["frontend_bw_mhz"]),
        float(plan_sec["if_center_mhz"]),
    )
    return RunConfig(
        chain=ChainConfig(**chain_kwargs),
        plan=plan,
        mcs_set=tuple(int(x) for x in run["mcs_set"].split(",")),
        bandwidths_mhz=tuple(int(x) for x in run["bandwidths_mhz"].split(",")),
        guard_interval=run["guard_interval"],
        frame_len_bytes=int(run["frame_len_bytes"]),
        n_frames=int(run["n_frames"]),
        rssi_grid_dbm=tuple(float(x) for x in run["rssi_grid_dbm"].split(",")),
        distance_variants=tuple(
            (float(p), bool(int(l)))
            for p, l in (v.split(",") for v in run["distance_variants"].split(";"))
        ),
        distance_mcs_set=tuple(int(x) for x in run["distance_mcs_set"].split(",")),
        fsr_threshold=float(run["fsr_threshold"]),
        seed=int(run["seed"]),
    )


def _outdir(args) -> str:
    out = args.out or os.environ.get(OUTDIR_ENV) or "."
    os.makedirs(out, exist_ok=True)
    return out


def _effective_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if getattr(args, "frames", None) is not None:
        cfg = dataclasses.replace(cfg, n_frames=args.frames)
    if getattr(args, "mcs", None):
        cfg = dataclasses.replace(cfg, mcs_set=tuple(int(x) for x in args.mcs.split(",")))
    return cfg


def _gi(cfg: RunConfig) -> GuardInterval:
    return GuardInterval.LONG if cfg.guard_interval == "long" else GuardInterval.SHORT


def cmd_freq_plan(args) -> int:
    target = None if args.if_mhz in (None, "auto") else float(args.if_mhz)
    try:
        p = freqplan.plan(
            args.tx_channel, args.rx_channel, args.bw, args.frontend_bw, target
        )
    except (freqplan.PlanError, ValueError) as e:
        print(f"infeasible frequency plan: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    print(freqplan.format_plan(p))
    if args.machine:
        print()
        print(freqplan.format_plan(p, machine=True))
    violations = freqplan.validate(p)
    if violations:
        for v in violations:
            print(f"violation: {v}", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _effective_config(args)
    out = _outdir(args)
    save_config(cfg, os.path.join(out, "sweep_config.ini"))
    for bw_mhz in cfg.bandwidths_mhz:
        bw = Bandwidth.MHZ20 if bw_mhz == 20 else Bandwidth.MHZ40
        curves = experiments.fsr_sweep(
            list(cfg.mcs_set), bw, list(cfg.rssi_grid_dbm), cfg.n_frames,
            cfg.frame_len_bytes, cfg.chain, cfg.seed,
            guard_interval=_gi(cfg), workers=args.workers,
        )
        path = os.path.join(out, f"fsr_{bw_mhz}mhz.csv")
        experiments.write_fsr_csv(curves, path)
        print(f"wrote {path}")
    return EXIT_OK


def cmd_distance(args) -> int:
    cfg = _effective_config(args)
    out = _outdir(args)
    save_config(cfg, os.path.join(out, "distance_config.ini"))
    results = []
    mcs_set = cfg.distance_mcs_set if not args.mcs else tuple(
        int(x) for x in args.mcs.split(",")
    )
    for m in mcs_set:
        results.extend(
            experiments.max_distance(
                list(cfg.distance_variants), m, cfg.chain,
                fsr_threshold=cfg.fsr_threshold,
                n_frames=cfg.n_frames, frame_len_bytes=cfg.frame_len_bytes,
                guard_interval=_gi(cfg), seed=cfg.seed, workers=args.workers,
            )
        )
    path = os.path.join(out, "distance.csv")
    experiments.write_distance_csv(results, path)
    for r in results:
        flag = "  (undecodable at any distance)" if r.undecodable else ""
        print(
            f"pa {r.pa_gain_db:g} dB lens {int(r.lens)} MCS {r.mcs_index}: "
            f"{r.max_distance_m:g} m{flag}"
        )
    print(f"wrote {path}")
    return EXIT_OK


def cmd_probe(args) -> int:
    cfg = _effective_config(args)
    out = _outdir(args)
    save_config(cfg, os.path.join(out, "probe_config.ini"))
    ppdu_cfg = PpduConfig(
        mcs(args.probe_mcs), Bandwidth.MHZ20, _gi(cfg), cfg.frame_len_bytes
    )
    report = experiments.distortion_report(cfg.chain, ppdu_cfg, seed=cfg.seed)
    text = report.table_text()
    print(text)
    experiments._atomic_write(os.path.join(out, "probe_stats.txt"), text + "\n")
    experiments.write_constellation_csv(report, os.path.join(out, "constellations.csv"))
    lines = ["tap,subcarrier,power_dbm"]
    for tap, arr in report.per_subcarrier_dbm.items():
        for k, v in enumerate(arr):
            lines.append(f"{tap},{k},{v:.3f}")
    experiments._atomic_write(os.path.join(out, "per_subcarrier.csv"), "\n".join(lines) + "\n")
    for cap in report.captures:
        write_iq(cap.waveform, os.path.join(out, f"tap_{cap.point.value}.iq"))
    print(f"wrote probe outputs to {out}")
    return EXIT_OK


def _loopback_trial(params) -> bool:
    mcs_index, bw_mhz, gi_name, frame_len, seed = params
    bw = Bandwidth.MHZ20 if bw_mhz == 20 else Bandwidth.MHZ40
    gi = GuardInterval.LONG if gi_name == "long" else GuardInterval.SHORT
    cfg = PpduConfig(mcs(mcs_index), bw, gi, frame_len)
    rng = np.random.default_rng(np.random.SeedSequence((seed, mcs_index, bw_mhz, len(gi_name))))
    psdu = rng.integers(0, 256, frame_len, dtype=np.uint8).tobytes()
    w = generate_ppdu(psdu, cfg, scrambler_seed=int(rng.integers(1, 128)))
    decoded, stats = receive_ppdu(w, cfg)
    return bool(stats.fcs_ok and decoded == psdu)


def cmd_loopback(args) -> int:
    frames = args.frames or 100
    frame_len = args.psdu_len
    t0 = time.time()
    all_ok = True
    from multiprocessing import Pool

    workers = args.workers or min(4, os.cpu_count() or 1)
    for m in range(8):
        for bw_mhz in (20, 40):
            for gi_name in ("long", "short"):
                params = [
                    (m, bw_mhz, gi_name, frame_len, (args.seed or 1) * 100000 + f)
                    for f in range(frames)
                ]
                if workers > 1:
                    with Pool(workers) as pool:
                        oks = pool.map(_loopback_trial, params)
                else:
                    oks = [_loopback_trial(p) for p in params]
                fsr = sum(oks) / frames
                all_ok &= fsr == 1.0
                print(f"MCS{m} {bw_mhz} MHz {gi_name:5s} GI: FSR {fsr:.3f}")
    print(f"loopback {'PASS' if all_ok else 'FAIL'} in {time.time() - t0:.1f} s")
    return EXIT_OK if all_ok else EXIT_INTERNAL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="lightlink",
        description="802.11n-over-optical link simulator",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    fp = sub.add_parser("freq-plan", help="compute and validate a frequency plan")
    fp.add_argument("--tx-channel", type=int, default=1)
    fp.add_argument("--rx-channel", type=int, default=6)
    fp.add_argument("--bw", type=int, default=20, choices=(20, 40))
    fp.add_argument("--frontend-bw", type=float, default=100.0)
    fp.add_argument("--if", dest="if_mhz", default="37", help="IF center MHz or 'auto'")
    fp.add_argument("--machine", action="store_true", help="also print key=value block")
    fp.set_defaults(func=cmd_freq_plan)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration file (INI)")
    common.add_argument("--out", help=f"output directory (default ${OUTDIR_ENV} or .)")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--frames", type=int, default=None)
    common.add_argument("--workers", type=int, default=None)

    sw = sub.add_parser("sweep", parents=[common], help="FSR vs RSSI Monte-Carlo sweep")
    sw.add_argument("--mcs", help="comma-separated MCS list (default all)")
    sw.set_defaults(func=cmd_sweep)

    di = sub.add_parser("distance", parents=[common], help="maximum-distance search")
    di.add_argument("--mcs", help="comma-separated MCS list (default 0,3,7)")
    di.set_defaults(func=cmd_distance)

    pr = sub.add_parser("probe", parents=[common], help="probe-point distortion report")
    pr.add_argument("--probe-mcs", type=int, default=3)
    pr.set_defaults(func=cmd_probe)

    lb = sub.add_parser("loopback", parents=[common], help="PHY loopback self-test")
    lb.add_argument("--psdu-len", type=int, default=1000)
    lb.set_defaults(func=cmd_loopback)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except (freqplan.PlanError, FrequencyPlanError) as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, FileNotFoundError) as e:
        print(f"invalid configuration: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except Exception as e:  # internal error
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
