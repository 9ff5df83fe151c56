import dataclasses

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lightlink.freqplan import (
    FrequencyPlan,
    PlanError,
    channel_center_mhz,
    format_plan,
    plan,
    validate,
)


def test_channel_centers():
    assert channel_center_mhz(1) == 2412
    assert channel_center_mhz(6) == 2437
    assert channel_center_mhz(13) == 2472


def test_channel_range_enforced():
    with pytest.raises(ValueError):
        channel_center_mhz(0)
    with pytest.raises(ValueError):
        channel_center_mhz(14)


def test_reference_plan():
    # channel 1 down to a 37 MHz IF and back up to channel 6
    p = plan(1, 6, 20, 100.0, 37.0)
    assert p.lo_tx_mhz == 2375.0
    assert p.lo_rx_mhz == 2400.0
    assert p.if_center_mhz == 37.0
    assert validate(p) == []


def test_symmetric_auto_plan():
    p = plan(1, 1, 20, 100.0, None)
    assert p.lo_tx_mhz == p.lo_rx_mhz
    assert validate(p) == []


def test_auto_plan_maximizes_if():
    p = plan(1, 1, 20, 100.0, None)
    # largest grid-aligned IF leaving 10 MHz of guard to the band edge
    assert p.if_center_mhz + 10 <= 100.0
    assert p.if_center_mhz == 87.0


def test_infeasible_narrow_frontend():
    with pytest.raises(PlanError):
        plan(1, 1, 40, 30.0, None)


def test_target_if_out_of_band():
    with pytest.raises(PlanError):
        plan(1, 1, 20, 100.0, 95.0)  # band edge above the front-end limit
    with pytest.raises(PlanError):
        plan(1, 1, 20, 100.0, 5.0)  # band edge below 0


def test_off_grid_lo_flagged():
    p = plan(1, 6, 20, 100.0, 37.0)
    bad = dataclasses.replace(p, lo_tx_mhz=2380.0, if_center_mhz=32.0)
    violations = validate(bad)
    assert any("grid" in v for v in violations)
    assert validate(bad, enforce_grid=False) == [
        v for v in violations if "grid" not in v
    ]


def test_5ghz_lo_cap_violation():
    p = FrequencyPlan(
        wifi_channel_tx=None, wifi_channel_rx=None,
        channel_center_tx_mhz=5180.0, channel_center_rx_mhz=5180.0,
        lo_tx_mhz=5143.0, lo_rx_mhz=5143.0, if_center_mhz=37.0,
        channel_bw_mhz=20, frontend_bw_mhz=100.0,
    )
    violations = validate(p)
    assert any("exceeds 4400" in v for v in violations)


def test_validate_reports_all_violations():
    p = FrequencyPlan(
        wifi_channel_tx=None, wifi_channel_rx=None,
        channel_center_tx_mhz=5180.0, channel_center_rx_mhz=5180.0,
        lo_tx_mhz=5183.0, lo_rx_mhz=5183.0, if_center_mhz=-3.0,
        channel_bw_mhz=20, frontend_bw_mhz=100.0,
    )
    violations = validate(p)
    assert len(violations) >= 3  # negative IF, band edge, LO cap, grid


@given(
    tx=st.integers(1, 13),
    rx=st.integers(1, 13),
    bw=st.sampled_from([20, 40]),
    fe=st.floats(45.0, 150.0),
)
@settings(max_examples=120, deadline=None)
def test_planner_never_emits_invalid_plans(tx, rx, bw, fe):
    try:
        p = plan(tx, rx, bw, fe, None)
    except PlanError:
        return
    assert validate(p) == []


@given(tx=st.integers(1, 13), rx=st.integers(1, 13))
@settings(max_examples=60, deadline=None)
def test_down_up_roundtrip_lands_on_rx_center(tx, rx):
    try:
        p = plan(tx, rx, 20, 100.0, None)
    except PlanError:
        return
    assert p.channel_center_tx_mhz - p.lo_tx_mhz + p.lo_rx_mhz == p.channel_center_rx_mhz


@given(
    tx=st.integers(1, 13),
    fe1=st.floats(45.0, 120.0),
    extra=st.floats(0.0, 60.0),
)
@settings(max_examples=60, deadline=None)
def test_feasibility_monotone_in_frontend_bw(tx, fe1, extra):
    try:
        plan(tx, tx, 20, fe1, None)
    except PlanError:
        return
    plan(tx, tx, 20, fe1 + extra, None)  # must not raise


def test_format_plan_machine_block():
    p = plan(1, 6, 20, 100.0, 37.0)
    block = format_plan(p, machine=True)
    assert "lo_tx_mhz=2375.0" in block
    assert "if_center_mhz=37.0" in block
