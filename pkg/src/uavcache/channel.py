"""Radio propagation and rate computations.

Three link families are modeled:

* UAV -> user mmWave access links: log-distance path loss with probabilistic
  LoS/NLoS mixing driven by the elevation angle (degrees), noise-limited SNR.
* BBU -> UAV ground-to-air wireless fronthaul: power-law gain with an extra
  NLoS attenuation factor, same LoS probability curve.
* RRH-cluster -> user links: zero-forcing beamforming over Rayleigh-faded
  power-law channels, with inter-cluster and fronthaul interference.

Rates are reported as bits per slot: instantaneous rates integrated over the
slot's intervals (each of duration slot/F), so content delays computed from
them come out in seconds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .config import ChannelParams, RrhCluster

SPEED_OF_LIGHT = 3e8


class ChannelError(ValueError):
    pass


@dataclass(frozen=True)
class FadingDraw:
    """One realization of the random channel components.

    Shadowing terms are dB offsets (zero-mean Gaussian); ``rayleigh_gain`` is a
    unit-mean exponential power gain.
    """

    shadow_los_db: float = 0.0
    shadow_nlos_db: float = 0.0
    rayleigh_gain: float = 1.0


@dataclass(frozen=True)
class LinkBudget:
    pathloss_db: float
    los_probability: float
    snr_linear: float
    rate_bps: float


def free_space_pl_db(d0_m: float, carrier_hz: float) -> float:
    if d0_m <= 0 or carrier_hz <= 0:
        raise ChannelError("reference distance and carrier frequency must be positive")
    return 20.0 * np.log10(4.0 * np.pi * d0_m * carrier_hz / SPEED_OF_LIGHT)


def distance_3d(uav_xyz, user_xy):
    uav_xyz = np.asarray(uav_xyz, dtype=float)
    user_xy = np.asarray(user_xy, dtype=float)
    dx = user_xy[..., 0] - uav_xyz[0]
    dy = user_xy[..., 1] - uav_xyz[1]
    return np.sqrt(dx * dx + dy * dy + uav_xyz[2] ** 2)


def los_probability(uav_xyz, user_xy, p: ChannelParams):
    """Logistic LoS probability in the elevation angle (degrees)."""
    d = distance_3d(uav_xyz, user_xy)
    if np.any(d <= 0.0):
        raise ChannelError("zero distance between transmitter and receiver")
    phi_deg = np.degrees(np.arcsin(np.clip(uav_xyz[2] / d, -1.0, 1.0)))
    return 1.0 / (1.0 + p.env_x * np.exp(-p.env_y * (phi_deg - p.env_x)))


def mixed_pathloss_db(dist, altitude, p: ChannelParams,
                      shadow_los_db=0.0, shadow_nlos_db=0.0):
    """LoS-probability-weighted log-distance path loss, vectorized over links.

    ``dist`` is the 3-D transmitter-receiver distance and ``altitude`` the
    transmitter height (both broadcastable); shadowing offsets default to
    their zero mean.
    """
    dist = np.asarray(dist, dtype=float)
    if np.any(dist <= 0.0):
        raise ChannelError("zero distance between transmitter and receiver")
    l_fs = free_space_pl_db(p.fs_ref_distance_m, p.carrier_hz)
    phi_deg = np.degrees(np.arcsin(np.clip(np.asarray(altitude, dtype=float) / dist, -1.0, 1.0)))
    pr = 1.0 / (1.0 + p.env_x * np.exp(-p.env_y * (phi_deg - p.env_x)))
    log_d = np.log10(dist)
    l_los = l_fs + 10.0 * p.exponent_los * log_d + shadow_los_db
    l_nlos = l_fs + 10.0 * p.exponent_nlos * log_d + shadow_nlos_db
    return pr * l_los + (1.0 - pr) * l_nlos


def uav_user_pathloss_db(uav_xyz, user_xy, p: ChannelParams,
                         fading: FadingDraw | None = None):
    """Average (or sampled) access-link path loss in dB.

    With ``fading=None`` the shadowing terms sit at their zero mean and the
    result is the LoS-probability-weighted mix of the two log-distance laws.
    """
    uav_xyz = np.asarray(uav_xyz, dtype=float)
    d = distance_3d(uav_xyz, user_xy)
    shadow_los = fading.shadow_los_db if fading is not None else 0.0
    shadow_nlos = fading.shadow_nlos_db if fading is not None else 0.0
    return mixed_pathloss_db(d, uav_xyz[2], p, shadow_los, shadow_nlos)


def uav_user_snr(power_w, pathloss_db, noise_w: float):
    return np.asarray(power_w) / (10.0 ** (np.asarray(pathloss_db) / 10.0) * noise_w)


def uav_slot_capacity_bits(uav_xyz, user_xy_per_interval, power_per_interval_w,
                           n_served: int, p: ChannelParams, bandwidth_hz: float,
                           noise_w: float, slot_duration_s: float) -> float:
    """Bits deliverable to one user over a slot, splitting the band n_served ways."""
    if n_served < 1:
        raise ChannelError("capacity undefined for an empty association set")
    user_xy = np.atleast_2d(np.asarray(user_xy_per_interval, dtype=float))
    power = np.broadcast_to(np.asarray(power_per_interval_w, dtype=float), (user_xy.shape[0],))
    pl = uav_user_pathloss_db(uav_xyz, user_xy, p)
    snr = uav_user_snr(power, pl, noise_w)
    per_interval_rate = (bandwidth_hz / n_served) * np.log2(1.0 + snr)
    dt = slot_duration_s / user_xy.shape[0]
    return float(np.sum(per_interval_rate) * dt)


def g2a_gain(uav_xyz, bbu_xy, p: ChannelParams):
    """Expected linear channel gain of the ground-to-air fronthaul link.

    NLoS links suffer an extra attenuation factor g2a_nlos_factor, so the
    average gain is Pr_LoS * d**-beta + (1 - Pr_LoS) * d**-beta / eta.
    """
    d = distance_3d(uav_xyz, bbu_xy)
    if np.any(d <= 0.0):
        raise ChannelError("zero distance between BBU and UAV")
    pr = los_probability(uav_xyz, bbu_xy, p)
    base = d ** (-p.g2a_exponent)
    return pr * base + (1.0 - pr) * base / p.g2a_nlos_factor


def g2a_fronthaul_bits(uav_xyz, bbu_xy, p: ChannelParams, bbu_power_w: float,
                       bandwidth_hz: float, noise_w: float,
                       slot_duration_s: float) -> float:
    """Bits per slot of the BBU -> UAV wireless fronthaul at expected gain."""
    gain = g2a_gain(uav_xyz, bbu_xy, p)
    snr = bbu_power_w * gain / noise_w
    return float(bandwidth_hz * np.log2(1.0 + snr) * slot_duration_s)


def rrh_slot_capacity_bits(sinr_per_interval, bandwidth_hz: float,
                           slot_duration_s: float) -> float:
    sinr = np.atleast_1d(np.asarray(sinr_per_interval, dtype=float))
    dt = slot_duration_s / sinr.shape[0]
    return float(np.sum(bandwidth_hz * np.log2(1.0 + sinr)) * dt)


def rayleigh_channel_rows(user_xy, antennas, gains, exponent: float) -> np.ndarray:
    """Amplitude channel rows h[u, a] = sqrt(g[u, a]) * d[u, a]**-exponent."""
    user_xy = np.atleast_2d(np.asarray(user_xy, dtype=float))
    diff = user_xy[:, None, :] - np.asarray(antennas, dtype=float)[None, :, :]
    dist = np.linalg.norm(diff, axis=2)
    if np.any(dist <= 0.0):
        raise ChannelError("zero distance between user and antenna")
    return np.sqrt(np.asarray(gains, dtype=float)) * dist ** (-exponent)


def zf_beamformer(h: np.ndarray) -> np.ndarray:
    """Zero-forcing matrix F = H^T (H H^T)^-1 for a full-row-rank H."""
    u_q, r_q = h.shape
    if u_q > r_q:
        raise ChannelError(f"cluster overloaded: {u_q} users on {r_q} antennas")
    gram = h @ h.T
    try:
        inv = np.linalg.inv(gram)
    except np.linalg.LinAlgError as exc:
        raise ChannelError("rank-deficient channel matrix") from exc
    f = h.T @ inv
    if np.abs(h @ f - np.eye(u_q)).max() > linalg.ZF_NULLING_TOL * max(1.0, np.abs(f).max()):
        raise ChannelError("zero-forcing nulling failed (ill-conditioned channel)")
    return f


def zfbf_sinr(clusters: list[RrhCluster], assigned: list[list[int]],
              user_xy: np.ndarray, fading_power: list[np.ndarray],
              rrh_power_w: float, bbu_interference_w: np.ndarray,
              noise_w: float, exponent: float) -> dict[int, float]:
    """Per-user SINR under zero-forcing within clusters.

    ``assigned[q]`` lists the user indices served by cluster q, ``fading_power[q]``
    holds unit-mean exponential power gains of shape (num_users, R_q) toward
    cluster q's antennas (rows are indexed by global user id so the same draws
    serve both the direct and the cross channels).  Intra-cluster interference
    is nulled exactly; other clusters' beams and the wireless-fronthaul term
    enter the denominator.
    """
    user_xy = np.asarray(user_xy, dtype=float)
    beams: dict[int, np.ndarray] = {}
    for q, cluster in enumerate(clusters):
        users = assigned[q]
        if not users:
            continue
        h = rayleigh_channel_rows(user_xy[users], cluster.antennas,
                                  fading_power[q][users], exponent)
        try:
            beams[q] = zf_beamformer(h)
        except ChannelError as exc:
            raise ChannelError(f"cluster {cluster.id}: {exc}") from exc

    sinr: dict[int, float] = {}
    for q, cluster in enumerate(clusters):
        for i in assigned[q]:
            interference = float(bbu_interference_w[i])
            for j, other in enumerate(clusters):
                if j == q or j not in beams:
                    continue
                cross = rayleigh_channel_rows(user_xy[i], other.antennas,
                                              fading_power[j][i], exponent)
                powers = (cross @ beams[j]) ** 2
                interference += rrh_power_w * float(np.sum(powers))
            sinr[i] = rrh_power_w / (interference + noise_w)
    return sinr
