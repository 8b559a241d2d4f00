"""Delay, opinion-score, and rate-requirement computations.

Conventions: link rates are bits per slot, so the transmission time of a
content of L bits over a component of rate C is L * slot_duration / C seconds.
A delivery is scored on two axes: a linear delay score in [0, 1] anchored at
the system-wide delay lower bound, and a binary per-interval device score that
checks the instantaneous rate against the device's rate floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import free_space_pl_db
from .config import ScenarioConfig

MOS_BINS = (
    (0.8, "Excellent"),
    (0.6, "Very Good"),
    (0.4, "Good"),
    (0.2, "Fair"),
    (0.0, "Poor"),
)

LINK_RRH = "rrh"
LINK_UAV_FRONTHAUL = "uav_fronthaul"
LINK_UAV_CACHE = "uav_cache"


class InfeasibleDelay(ValueError):
    """The delay budget cannot be met even at infinite access rate."""


@dataclass(frozen=True)
class DeliveryPath:
    """A content route: which link family and the component rates (bits/slot).

    Cache hits have no fronthaul component.
    """

    kind: str
    access_bits_per_slot: float
    fronthaul_bits_per_slot: float | None = None

    def __post_init__(self):
        if self.kind == LINK_UAV_CACHE and self.fronthaul_bits_per_slot is not None:
            raise ValueError("cache deliveries have no fronthaul component")
        if self.kind in (LINK_RRH, LINK_UAV_FRONTHAUL) and self.fronthaul_bits_per_slot is None:
            raise ValueError(f"{self.kind} deliveries need a fronthaul rate")


@dataclass
class QoeReport:
    """Scored outcome of one user's content delivery in one slot."""

    user: int
    content: int
    link: str
    delay_s: float
    delay_score: float
    device_score_frac: float
    qoe: float
    mos_label: str
    satisfied: bool
    delivered: bool
    power_w: float
    cache_hit: bool
    power_feasible: bool


def delay_s(path: DeliveryPath, content_bits: float, slot_duration_s: float) -> float:
    if path.access_bits_per_slot <= 0.0:
        raise InfeasibleDelay("zero access rate")
    total = slot_duration_s * content_bits / path.access_bits_per_slot
    if path.fronthaul_bits_per_slot is not None:
        if path.fronthaul_bits_per_slot <= 0.0:
            raise InfeasibleDelay("zero fronthaul rate")
        if math.isfinite(path.fronthaul_bits_per_slot):
            total += slot_duration_s * content_bits / path.fronthaul_bits_per_slot
    return total


def max_access_rate_bits(cfg: ScenarioConfig) -> float:
    """Best-case per-slot access capacity: one user, peak power, overhead UAV
    at the altitude floor, LoS law with a 4-sigma favorable shadowing margin."""
    p = cfg.pathloss
    best_pl_db = (free_space_pl_db(p.fs_ref_distance_m, p.carrier_hz)
                  + 10.0 * p.exponent_los * math.log10(cfg.min_altitude_m)
                  - 4.0 * p.shadow_std_los_db)
    snr = cfg.uav_max_power_w / (10.0 ** (best_pl_db / 10.0) * cfg.noise_power_w)
    return cfg.uav_bandwidth_hz * math.log2(1.0 + snr) * cfg.slot_duration_s


def delay_lower_bound_s(cfg: ScenarioConfig) -> float:
    """No delivery can beat both the wired fronthaul and the peak access link."""
    wired = cfg.content_size_bits / cfg.fronthaul_rate_bps
    access = cfg.slot_duration_s * cfg.content_size_bits / max_access_rate_bits(cfg)
    return min(wired, access)


def delay_score(value_s: float, cfg: ScenarioConfig) -> float:
    """Linear map from delay to [0, 1]: 1 at the lower bound, 0 at the slot length.

    Deliveries slower than one slot count as failures and score 0.
    """
    if value_s > cfg.slot_duration_s:
        return 0.0
    bound = delay_lower_bound_s(cfg)
    score = (cfg.slot_duration_s - value_s) / (cfg.slot_duration_s - bound)
    return float(np.clip(score, 0.0, 1.0))


def device_score(rate_bps: float, required_bps: float) -> int:
    return 1 if rate_bps >= required_bps else 0


def mos_label(qoe: float) -> str:
    for floor, label in MOS_BINS:
        if qoe >= floor:
            return label
    return "Poor"


def qoe_score(delay_score_value: float, device_scores, weight_delay: float,
              weight_device: float) -> tuple[float, str]:
    scores = np.asarray(device_scores, dtype=float)
    q = weight_delay * delay_score_value + weight_device * float(scores.mean())
    return float(q), mos_label(q)


def delay_rate_requirement_bits(cached: bool, cfg: ScenarioConfig,
                                fronthaul_bits_per_slot: float | None = None) -> float:
    """Access rate (bits/slot) at which the delay score reaches its target.

    Uncached contents must also traverse the wireless fronthaul, which eats
    into the delay budget, so caching strictly lowers the requirement.
    """
    budget_s = cfg.slot_duration_s - cfg.mos_min * (cfg.slot_duration_s - delay_lower_bound_s(cfg))
    if not cached:
        if fronthaul_bits_per_slot is None or fronthaul_bits_per_slot <= 0.0:
            raise InfeasibleDelay("uncached delivery needs a positive fronthaul rate")
        budget_s -= cfg.slot_duration_s * cfg.content_size_bits / fronthaul_bits_per_slot
    if budget_s <= 0.0:
        raise InfeasibleDelay(
            f"delay budget exhausted by the fronthaul leg ({budget_s:.6g} s remaining)"
        )
    return cfg.content_size_bits * cfg.slot_duration_s / budget_s


def qoe_rate_target_bps(delay_req_bits_per_slot: float, device_req_bps: float,
                        slot_duration_s: float) -> float:
    """The per-interval rate that satisfies both the delay and device criteria."""
    return max(delay_req_bits_per_slot / slot_duration_s, device_req_bps)


def min_uav_power_w(pathloss_db, rate_target_bps, n_served: int,
                    bandwidth_hz: float, noise_w: float):
    """Transmit power making the shared-band rate hit the target exactly.

    Vectorized over path loss and rate target; feasibility against the power
    cap is the caller's concern (values are returned unclamped).
    """
    rate = np.asarray(rate_target_bps, dtype=float)
    with np.errstate(over="ignore"):  # unreachable targets price at infinity
        snr_needed = np.exp2(rate * n_served / bandwidth_hz) - 1.0
        return snr_needed * noise_w * 10.0 ** (np.asarray(pathloss_db, dtype=float) / 10.0)
