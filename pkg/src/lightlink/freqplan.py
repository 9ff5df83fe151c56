"""Up/down-conversion frequency planning under the synthesizer and front-end
constraints: LO on a 25 MHz grid up to 4400 MHz, IF band inside the
optical front-end's 0-100 MHz range.
"""

from __future__ import annotations

from dataclasses import dataclass

LO_GRID_MHZ = 25
LO_MAX_MHZ = 4400
VALID_CHANNEL_BW_MHZ = (20, 40)


class PlanError(Exception):
    """No feasible frequency plan; the message names the violated constraint."""


def channel_center_mhz(channel: int) -> int:
    """Center frequency of a 2.4 GHz band channel."""
    if not 1 <= channel <= 13:
        raise ValueError(f"2.4 GHz channel must be 1..13, got {channel}")
    return 2407 + 5 * channel


@dataclass(frozen=True)
class FrequencyPlan:
    wifi_channel_tx: int | None
    wifi_channel_rx: int | None
    channel_center_tx_mhz: float
    channel_center_rx_mhz: float
    lo_tx_mhz: float
    lo_rx_mhz: float
    if_center_mhz: float
    channel_bw_mhz: int
    frontend_bw_mhz: float


def validate(plan: FrequencyPlan, enforce_grid: bool = True) -> list[str]:
    """Check all plan invariants; returns every violation, not just the first."""
    v = []
    if plan.channel_bw_mhz not in VALID_CHANNEL_BW_MHZ:
        v.append(f"channel bandwidth {plan.channel_bw_mhz} MHz not in {VALID_CHANNEL_BW_MHZ}")
    if abs(plan.channel_center_tx_mhz - plan.lo_tx_mhz - plan.if_center_mhz) > 1e-9:
        v.append("IF center != TX channel center - TX LO")
    if abs(plan.channel_center_rx_mhz - plan.lo_rx_mhz - plan.if_center_mhz) > 1e-9:
        v.append("RX LO does not map the IF back to the RX channel center")
    if plan.if_center_mhz <= 0:
        v.append(f"IF center {plan.if_center_mhz} MHz not positive")
    half = plan.channel_bw_mhz / 2
    if plan.if_center_mhz - half < 0:
        v.append(f"IF band lower edge {plan.if_center_mhz - half} MHz below 0")
    if plan.if_center_mhz + half > plan.frontend_bw_mhz:
        v.append(
            f"IF band upper edge {plan.if_center_mhz + half} MHz exceeds "
            f"front-end bandwidth {plan.frontend_bw_mhz} MHz"
        )
    for name, lo in (("TX", plan.lo_tx_mhz), ("RX", plan.lo_rx_mhz)):
        if lo > LO_MAX_MHZ:
            v.append(f"{name} LO {lo} MHz exceeds {LO_MAX_MHZ} MHz")
        if lo <= 0:
            v.append(f"{name} LO {lo} MHz not positive")
        if enforce_grid and abs(lo / LO_GRID_MHZ - round(lo / LO_GRID_MHZ)) > 1e-9:
            v.append(f"{name} LO {lo} MHz not on the {LO_GRID_MHZ} MHz synthesizer grid")
    return v


def _check_if(if_mhz: float, channel_bw_mhz: int, frontend_bw_mhz: float) -> str | None:
    half = channel_bw_mhz / 2
    if if_mhz - half < 0:
        return f"IF {if_mhz} MHz puts the band edge below 0 MHz"
    if if_mhz + half > frontend_bw_mhz:
        return f"IF {if_mhz} MHz puts the band edge above the {frontend_bw_mhz} MHz front-end"
    return None


def plan(
    channel_tx: int,
    channel_rx: int | None = None,
    channel_bw_mhz: int = 20,
    frontend_bw_mhz: float = 100.0,
    target_if_mhz: float | None = None,
) -> FrequencyPlan:
    """Select grid-aligned LO frequencies placing the IF band inside the
    front-end range.  With target_if_mhz=None the largest feasible IF is
    chosen (maximum separation from DC).
    """
    if channel_rx is None:
        channel_rx = channel_tx
    if channel_bw_mhz not in VALID_CHANNEL_BW_MHZ:
        raise PlanError(f"channel bandwidth {channel_bw_mhz} MHz not in {VALID_CHANNEL_BW_MHZ}")
    center_tx = channel_center_mhz(channel_tx)
    center_rx = channel_center_mhz(channel_rx)
    half = channel_bw_mhz / 2
    if frontend_bw_mhz < channel_bw_mhz:
        raise PlanError(
            f"front-end bandwidth {frontend_bw_mhz} MHz cannot fit a "
            f"{channel_bw_mhz} MHz channel"
        )

    if target_if_mhz is not None:
        bad = _check_if(target_if_mhz, channel_bw_mhz, frontend_bw_mhz)
        if bad:
            raise PlanError(bad)
        candidates = [target_if_mhz]
    else:
        # Grid-aligned TX LOs from largest feasible IF downward.
        lo_min = center_tx - frontend_bw_mhz + half
        lo_max = min(center_tx - half, LO_MAX_MHZ)
        first = -(-lo_min // LO_GRID_MHZ) * LO_GRID_MHZ
        candidates = [center_tx - lo for lo in range(int(first), int(lo_max) + 1, LO_GRID_MHZ)]
        if not candidates:
            raise PlanError("no grid-aligned TX LO places the IF inside the front-end band")

    last_error = "no feasible IF"
    for if_mhz in candidates:
        lo_tx = center_tx - if_mhz
        lo_rx = center_rx - if_mhz
        p = FrequencyPlan(
            wifi_channel_tx=channel_tx,
            wifi_channel_rx=channel_rx,
            channel_center_tx_mhz=center_tx,
            channel_center_rx_mhz=center_rx,
            lo_tx_mhz=lo_tx,
            lo_rx_mhz=lo_rx,
            if_center_mhz=if_mhz,
            channel_bw_mhz=channel_bw_mhz,
            frontend_bw_mhz=frontend_bw_mhz,
        )
        violations = validate(p)
        if not violations:
            return p
        last_error = "; ".join(violations)
    raise PlanError(last_error)


def format_plan(p: FrequencyPlan, machine: bool = False) -> str:
    if machine:
        return "\n".join(
            f"{k}={getattr(p, k)}"
            for k in (
                "wifi_channel_tx", "wifi_channel_rx", "channel_center_tx_mhz",
                "channel_center_rx_mhz", "lo_tx_mhz", "lo_rx_mhz",
                "if_center_mhz", "channel_bw_mhz", "frontend_bw_mhz",
            )
        )
    rows = [
        ("TX channel", f"{p.wifi_channel_tx} ({p.channel_center_tx_mhz} MHz)"),
        ("RX channel", f"{p.wifi_channel_rx} ({p.channel_center_rx_mhz} MHz)"),
        ("TX LO", f"{p.lo_tx_mhz} MHz"),
        ("RX LO", f"{p.lo_rx_mhz} MHz"),
        ("IF center", f"{p.if_center_mhz} MHz"),
        ("Channel bandwidth", f"{p.channel_bw_mhz} MHz"),
        ("Front-end bandwidth", f"{p.frontend_bw_mhz} MHz"),
    ]
    width = max(len(r[0]) for r in rows)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)
