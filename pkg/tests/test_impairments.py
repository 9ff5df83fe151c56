import dataclasses

import numpy as np
import pytest

from lightlink.impairments import (
    ChainConfig,
    FrequencyPlanError,
    ProbePoint,
    agc_normalize,
    amplify_clip,
    attenuate,
    chain_budget_rssi_dbm,
    led_channel,
    mix,
    path_loss_db,
    probe_stats,
    run_chain,
)
from lightlink.mcs import Bandwidth, GuardInterval, PpduConfig, mcs
from lightlink.phy import generate_ppdu, receive_ppdu
from lightlink.phy.ofdm import grid
from lightlink.waveform import Waveform, add_inband_noise_dbm

from conftest import make_psdu


def unit_waveform(n=5000, rate=20e6, ref=0.0, seed=0):
    rng = np.random.default_rng(seed)
    s = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2)
    return Waveform(s, rate, ref, center_freq_hz=2412e6)


class TestAttenuate:
    def test_zero_db_identity(self):
        w = unit_waveform()
        out = attenuate(w, 0.0)
        assert np.array_equal(out.samples, w.samples)

    def test_15db_power(self):
        w = unit_waveform()
        out = attenuate(w, 15.0)
        assert out.mean_power() == pytest.approx(
            w.mean_power() * 10 ** (-1.5), rel=1e-9
        )

    def test_attenuate_amplify_inverse(self):
        w = unit_waveform()
        back = amplify_clip(attenuate(w, 15.0), 15.0, clip_backoff_db=None)
        np.testing.assert_allclose(back.samples, w.samples, atol=1e-12)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            attenuate(unit_waveform(), -1.0)


class TestMix:
    def test_paper_if_arithmetic(self):
        w = unit_waveform()
        out = mix(w, 2375e6, "down", frontend_bw_hz=100e6)
        assert out.center_freq_hz == pytest.approx(37e6)

    def test_conversion_loss_exact(self):
        w = unit_waveform()
        out = mix(w, 2375e6, "down", conversion_loss_db=5.6, frontend_bw_hz=100e6)
        assert out.power_dbm() == pytest.approx(w.power_dbm() - 5.6, abs=1e-9)

    def test_identity(self):
        w = unit_waveform()
        out = mix(w, 0.0, "up")
        assert np.array_equal(out.samples, w.samples)
        assert out.center_freq_hz == w.center_freq_hz

    def test_frontend_violation(self):
        w = unit_waveform()
        with pytest.raises(FrequencyPlanError):
            mix(w, 2410e6, "down", frontend_bw_hz=100e6)  # IF 2 MHz: edge below 0
        with pytest.raises(FrequencyPlanError):
            mix(w, 2290e6, "down", frontend_bw_hz=100e6)  # IF 122 MHz: above band

    def test_phase_noise_preserves_power(self):
        w = unit_waveform()
        out = mix(w, 2375e6, "down", phase_noise_var=1e-4,
                  rng=np.random.default_rng(0), frontend_bw_hz=100e6)
        assert out.power_dbm() == pytest.approx(w.power_dbm(), abs=0.01)


class TestAmplifyClip:
    def test_large_backoff_is_linear(self):
        w = unit_waveform()
        out = amplify_clip(w, 20.0, clip_backoff_db=40.0)
        np.testing.assert_allclose(
            out.samples, w.samples * 10.0, rtol=1e-12
        )

    def test_clipping_limits_magnitude(self):
        w = unit_waveform()
        out = amplify_clip(w, 20.0, clip_backoff_db=-2.0, model="hard")
        mag = np.abs(out.samples)
        a_max = np.mean(np.abs(w.samples * 10)) * 10 ** (-0.1)
        assert mag.max() <= a_max * (1 + 1e-9)

    def test_phase_preserved(self):
        w = unit_waveform()
        out = amplify_clip(w, 20.0, clip_backoff_db=0.0, model="hard")
        np.testing.assert_allclose(
            np.angle(out.samples), np.angle(w.samples), atol=1e-9
        )

    def test_rapp_softer_knee_than_hard(self):
        # The Rapp limiter compresses below the clip point too, so its
        # output power sits below the hard clipper's; both below linear.
        w = unit_waveform()
        hard = amplify_clip(w, 10.0, clip_backoff_db=3.0, model="hard")
        rapp = amplify_clip(w, 10.0, clip_backoff_db=3.0, model="rapp")
        linear = amplify_clip(w, 10.0, clip_backoff_db=None)
        assert rapp.mean_power() <= hard.mean_power() <= linear.mean_power()

    def test_unknown_model_rejected(self):
        with pytest.raises(ValueError):
            amplify_clip(unit_waveform(), 1.0, 0.0, model="cubic")


class TestAgc:
    def test_unit_input_identity(self):
        w = unit_waveform()
        out = agc_normalize(w, w.mean_power())
        np.testing.assert_allclose(out.samples, w.samples, rtol=1e-12)

    def test_reported_power_preserved(self):
        w = dataclasses.replace(unit_waveform(), ref_power_dbm=-24.53)
        before = w.power_dbm()
        out = agc_normalize(attenuate(w, 10.0), 1.0)
        assert out.mean_power() == pytest.approx(1.0, rel=1e-12)
        assert out.power_dbm() == pytest.approx(before - 10.0, abs=1e-9)

    def test_idempotent(self):
        w = attenuate(unit_waveform(), 7.0)
        once = agc_normalize(w, 1.0)
        twice = agc_normalize(once, 1.0)
        np.testing.assert_allclose(twice.samples, once.samples, rtol=1e-12)
        assert twice.ref_power_dbm == pytest.approx(once.ref_power_dbm)

    def test_zero_waveform_rejected(self):
        w = Waveform(np.zeros(10, dtype=np.complex128), 20e6)
        with pytest.raises(ValueError):
            agc_normalize(w, 1.0)


class TestPathLoss:
    def test_inverse_square_doubling(self, default_chain):
        l1 = path_loss_db(1.0, False, 0.0, default_chain)
        l2 = path_loss_db(2.0, False, 0.0, default_chain)
        assert l2 - l1 == pytest.approx(20 * np.log10(2), abs=1e-9)

    def test_lens_reduces_loss(self, default_chain):
        with_lens = path_loss_db(1.0, True, 0.0, default_chain)
        without = path_loss_db(1.0, False, 0.0, default_chain)
        assert without - with_lens == pytest.approx(default_chain.lens_gain_db)

    def test_pa_drive_beyond_saturation_absorbed(self, default_chain):
        # +20 dB drive only radiates the saturated gain; the excess shows
        # up as added link loss so the budget stays physical.
        base = path_loss_db(1.0, False, 0.0, default_chain)
        driven = path_loss_db(1.0, False, 20.0, default_chain)
        assert driven - base == pytest.approx(20.0 - default_chain.led_sat_gain_db)

    def test_nonpositive_distance_rejected(self, default_chain):
        with pytest.raises(ValueError):
            path_loss_db(0.0, False, 0.0, default_chain)


class TestChainConfig:
    def test_invariants_enforced(self):
        with pytest.raises(ValueError):
            ChainConfig(attenuator_db=-1)
        with pytest.raises(ValueError):
            ChainConfig(distance_m=0)
        with pytest.raises(ValueError):
            ChainConfig(led_bias=1.5)
        with pytest.raises(ValueError):
            ChainConfig(frontend_bw_hz=0)

    def test_40mhz_noise_floor_3db_higher(self, default_chain):
        assert default_chain.noise_floor_dbm(Bandwidth.MHZ40) == pytest.approx(
            default_chain.noise_floor_dbm(Bandwidth.MHZ20) + 3.0
        )

    def test_pa_saturation_rule(self):
        assert ChainConfig().effective_clip_backoff_db() == pytest.approx(18.0)
        assert ChainConfig(pa_gain_db=20.0).effective_clip_backoff_db() == pytest.approx(-2.0)
        assert ChainConfig(pa_gain_db=5.0).effective_clip_backoff_db() == pytest.approx(13.0)


class TestProbeStats:
    def test_synthetic_power_noise_snr(self, rng):
        # Signal at -17.14 dBm with noise at -40.67 dBm measures
        # SNR 23.52 +- 0.5 dB.
        cfg = PpduConfig(mcs(3), Bandwidth.MHZ20, GuardInterval.LONG, 1000)
        w = generate_ppdu(make_psdu(rng, 1000), cfg)
        w = dataclasses.replace(w, ref_power_dbm=-17.14)
        g = grid(cfg.bandwidth)
        w = add_inband_noise_dbm(w, -40.67, g.n_used / g.n_fft,
                                 np.random.default_rng(1))
        stats = probe_stats(w, cfg)
        assert stats.rx_power_dbm == pytest.approx(-17.14, abs=0.3)
        assert stats.noise_dbm == pytest.approx(-40.67, abs=0.6)
        assert stats.snr_db == pytest.approx(23.52, abs=0.5)

    def test_noiseless_evm_below_1pct(self, rng):
        cfg = PpduConfig(mcs(3), Bandwidth.MHZ20, GuardInterval.LONG, 300)
        w = generate_ppdu(make_psdu(rng, 300), cfg)
        stats = probe_stats(w, cfg, reference=w)
        assert stats.evm_percent is not None and stats.evm_percent < 1.0

    def test_evm_omitted_without_training(self, rng):
        cfg = PpduConfig(mcs(3), Bandwidth.MHZ20, GuardInterval.LONG, 300)
        w = generate_ppdu(make_psdu(rng, 300), cfg)
        stub = Waveform(w.samples[:100], 20e6, w.ref_power_dbm)
        stats = probe_stats(stub, cfg, reference=w)
        assert stats.evm_percent is None
        assert np.isfinite(stats.rx_power_dbm)


def run_default_chain(rng, cfg=None, seed=5, taps=(), target=None,
                      mcs_index=3, psdu_len=500):
    cfg = cfg or ChainConfig()
    pcfg = PpduConfig(mcs(mcs_index), Bandwidth.MHZ20, GuardInterval.LONG, psdu_len)
    psdu = make_psdu(rng, psdu_len)
    w = generate_ppdu(psdu, pcfg, scrambler_seed=int(rng.integers(1, 128)))
    out, caps = run_chain(w, cfg, pcfg, taps=taps, seed=seed, target_rssi_dbm=target)
    return psdu, pcfg, out, caps


class TestRunChain:
    def test_power_bookkeeping(self, rng):
        # Reported power at each tap equals tap-A power minus configured
        # losses along the path, within 0.1 dB (noise floors far below).
        cfg = ChainConfig(pd_noise_floor_dbm=-300.0, tx_noise_dbm=-300.0,
                          mixer_noise_dbm=-300.0, tx_evm_pct=0.0,
                          tx_phase_noise_var=0.0, phase_noise_var=0.0)
        _, _, _, caps = run_default_chain(rng, cfg, taps=tuple(ProbePoint))
        by_point = {c.point: c.stats.rx_power_dbm for c in caps}
        a = by_point[ProbePoint.A]
        assert a == pytest.approx(cfg.tx_power_dbm, abs=0.1)
        assert by_point[ProbePoint.B] == pytest.approx(a - 15.0 - 5.6, abs=0.1)
        assert by_point[ProbePoint.C] == pytest.approx(a - 20.6, abs=0.1)
        expected_e = chain_budget_rssi_dbm(cfg)
        assert by_point[ProbePoint.D] == pytest.approx(expected_e + 5.6, abs=0.1)
        assert by_point[ProbePoint.E] == pytest.approx(expected_e, abs=0.1)

    def test_all_identity_chain_a_equals_e(self, rng):
        cfg = ChainConfig(
            attenuator_db=0.0, mixer_conversion_loss_db=0.0,
            pd_noise_floor_dbm=-400.0, tx_noise_dbm=-400.0,
            mixer_noise_dbm=-400.0, tx_evm_pct=0.0, tx_phase_noise_var=0.0,
            phase_noise_var=0.0, path_loss_ref_db=0.0,
            distance_m=0.25, rx_nic_noise_share=0.0,
        )
        _, _, _, caps = run_default_chain(rng, cfg, taps=(ProbePoint.A, ProbePoint.E))
        a = next(c for c in caps if c.point is ProbePoint.A)
        e = next(c for c in caps if c.point is ProbePoint.E)
        np.testing.assert_allclose(e.waveform.samples, a.waveform.samples, atol=1e-9)

    def test_linear_region_equals_loopback(self, rng):
        # Clipping off, phase noise off, high SNR: decoded PSDU identical
        # to the no-chain loopback.
        cfg = ChainConfig(tx_evm_pct=0.0, tx_phase_noise_var=0.0,
                          phase_noise_var=0.0)
        psdu, pcfg, out, _ = run_default_chain(rng, cfg, target=-20.0)
        decoded, stats = receive_ppdu(out, pcfg)
        assert stats.fcs_ok and decoded == psdu

    def test_deterministic_for_fixed_seed(self, rng):
        cfg = ChainConfig()
        pcfg = PpduConfig(mcs(3), Bandwidth.MHZ20, GuardInterval.LONG, 300)
        psdu = make_psdu(rng, 300)
        w = generate_ppdu(psdu, pcfg, scrambler_seed=17)
        out1, caps1 = run_chain(w, cfg, pcfg, taps=(ProbePoint.E,), seed=99)
        out2, caps2 = run_chain(w, cfg, pcfg, taps=(ProbePoint.E,), seed=99)
        assert np.array_equal(out1.samples, out2.samples)
        assert np.array_equal(caps1[0].waveform.samples, caps2[0].waveform.samples)

    def test_target_rssi_hits_target(self, rng):
        _, pcfg, out, _ = run_default_chain(rng, target=-42.0)
        _, stats = receive_ppdu(out, pcfg)
        assert stats.rssi_dbm == pytest.approx(-42.0, abs=0.3)

    def test_agc_output_power_normalized(self, rng):
        _, _, out, _ = run_default_chain(rng, target=-50.0)
        assert out.mean_power() == pytest.approx(1.0, rel=0.05)


class TestLedChannel:
    def test_identity_when_lossless_and_quiet(self):
        cfg = ChainConfig(pd_noise_floor_dbm=-400.0, rx_nic_noise_share=0.0)
        w = unit_waveform(ref=-20.0)
        out = led_channel(w, cfg, np.random.default_rng(0), Bandwidth.MHZ20,
                          target_power_dbm=w.power_dbm())
        np.testing.assert_allclose(out.samples, w.samples, rtol=1e-9)

    def test_bias_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            ChainConfig(led_bias=-0.1)

    def test_passband_mode_matches_baseband_when_linear(self, rng):
        # With the drive well inside the bias headroom the explicit
        # bias/clip path is a no-op up to resampling error.
        pcfg = PpduConfig(mcs(3), Bandwidth.MHZ20, GuardInterval.LONG, 200)
        w = generate_ppdu(make_psdu(rng, 200), pcfg)
        w = dataclasses.replace(w, ref_power_dbm=-20.0, center_freq_hz=37e6)
        base = ChainConfig(pd_noise_floor_dbm=-400.0, rx_nic_noise_share=0.0)
        pb = dataclasses.replace(base, optical_mode="passband")
        out_base = led_channel(w, base, np.random.default_rng(1), Bandwidth.MHZ20,
                               target_power_dbm=-30.0)
        out_pass = led_channel(w, pb, np.random.default_rng(1), Bandwidth.MHZ20,
                               target_power_dbm=-30.0)
        err = np.mean(np.abs(out_pass.samples - out_base.samples) ** 2)
        ref = np.mean(np.abs(out_base.samples) ** 2)
        assert err / ref < 1e-3


class TestModeEquivalence:
    def test_fsr_and_evm_match_across_optical_modes(self, rng):
        # Same seeds, moderate SNR: equivalent-baseband and IF-passband
        # modes agree within 2 % FSR and 1 EVM percentage point.
        n = 40
        results = {}
        for mode in ("baseband", "passband"):
            cfg = ChainConfig(optical_mode=mode)
            ok = 0
            evms = []
            for i in range(n):
                pcfg = PpduConfig(mcs(3), Bandwidth.MHZ20, GuardInterval.LONG, 300)
                frng = np.random.default_rng(3000 + i)
                psdu = make_psdu(frng, 300)
                w = generate_ppdu(psdu, pcfg, scrambler_seed=int(frng.integers(1, 128)))
                out, _ = run_chain(w, cfg, pcfg, seed=(4000 + i),
                                   target_rssi_dbm=-44.0)
                decoded, stats = receive_ppdu(out, pcfg)
                ok += int(stats.fcs_ok and decoded == psdu)
                evms.append(stats.evm_percent)
            results[mode] = (ok / n, float(np.mean(evms)))
        fsr_b, evm_b = results["baseband"]
        fsr_p, evm_p = results["passband"]
        assert abs(fsr_b - fsr_p) <= 0.02 + 1e-9
        assert abs(evm_b - evm_p) <= 1.0


def test_monotone_fsr_in_noise_floor(rng):
    # Raising the photodiode noise floor cannot raise the frame success
    # rate (small Monte-Carlo, fixed seeds).
    from lightlink.experiments import fsr_sweep

    fsrs = []
    for floor in (-60.0, -55.0, -50.0):
        cfg = ChainConfig(pd_noise_floor_dbm=floor)
        curves = fsr_sweep([3], Bandwidth.MHZ20, [-46.0], 60, 300, cfg, seed=6)
        fsrs.append(curves[0].points[0].fsr)
    assert fsrs[0] >= fsrs[1] >= fsrs[2]
