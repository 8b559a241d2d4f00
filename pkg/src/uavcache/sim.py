"""Slot-by-slot orchestration: predict, associate, cache, place, deliver, score.

One run covers one caching period (a synthetic day of T slots).  Planning uses
predicted positions and request distributions; delivery and scoring use the
generator's true state, so prediction error shows up as extra transmit power
and missed QoE, exactly where it would hurt a real deployment.

Ablation baselines reuse the identical pipeline with one stage disabled:
``no_uav`` (terrestrial service only), ``no_cache`` (every aerial delivery
rides the wireless fronthaul), ``random_cache`` (uniform cache picks), and
``fixed_placement`` (UAVs parked over their first-slot cluster centroids).
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

import numpy as np

from . import placement
from .channel import (g2a_fronthaul_bits, rrh_slot_capacity_bits, uav_user_pathloss_db,
                      uav_user_snr, zfbf_sinr)
from .config import ConfigError, RandomSource, RrhCluster, ScenarioConfig, validate
from .generators import SyntheticWorld
from .predictors import EsnPredictor, OraclePredictor
from .qoe import (LINK_RRH, LINK_UAV_CACHE, LINK_UAV_FRONTHAUL, MOS_BINS, InfeasibleDelay,
                  QoeReport, delay_lower_bound_s, delay_rate_requirement_bits, delay_score,
                  min_uav_power_w, mos_label, qoe_rate_target_bps)

# A delivery satisfies the user when its score reaches the top opinion bin.
SATISFIED_QOE = MOS_BINS[0][0]

BASELINES = ("no_uav", "no_cache", "random_cache", "fixed_placement")

SUMMARY_SCHEMA_VERSION = 1
SLOTS_SCHEMA_VERSION = 1

SLOTS_COLUMNS = (
    "slot", "user", "content", "link", "delivered", "delay_s", "delay_score",
    "device_frac", "qoe", "mos", "satisfied", "power_w", "cache_hit",
    "power_feasible",
)


class SimInvariantError(RuntimeError):
    """An internal bookkeeping invariant broke during a run."""


@dataclass
class SlotLog:
    slot: int
    global_slot: int
    reports: list[QoeReport]
    n_fr: int
    n_fetching: int
    uav_positions: np.ndarray  # (K, 3)
    uav_power_w: np.ndarray  # (K,) summed mean-interval power of served users
    caches: tuple[tuple[int, ...], ...]
    requests: int = 0
    delivered: int = 0
    failures: int = 0
    cache_hits: int = 0
    uav_deliveries: int = 0

    def reconcile(self) -> None:
        outcomes = sum(1 for r in self.reports if r.content >= 0)
        if self.requests != outcomes or self.delivered + self.failures != self.requests:
            raise SimInvariantError(
                f"slot {self.slot}: {self.requests} requests vs {self.delivered} delivered "
                f"+ {self.failures} failed")
        total = float(sum(r.power_w for r in self.reports))
        if not np.isclose(total, float(self.uav_power_w.sum()), rtol=1e-9, atol=1e-12):
            raise SimInvariantError(f"slot {self.slot}: per-UAV power does not add up")


def _reference_sets(user_xy: np.ndarray, clusters: list[RrhCluster]) -> list[list[int]]:
    """Capacity-capped nearest-cluster assignment used to estimate rates."""
    centroids = np.array([c.antennas.mean(axis=0) for c in clusters])
    dists = np.linalg.norm(user_xy[:, None, :] - centroids[None, :, :], axis=2)
    nearest = np.argmin(dists, axis=1)
    sets: list[list[int]] = []
    for q, cluster in enumerate(clusters):
        members = [i for i in range(user_xy.shape[0]) if nearest[i] == q]
        members.sort(key=lambda i: (dists[i, q], i))
        sets.append(members[: cluster.n_antennas])
    return sets


def _zf_fading(rs: RandomSource, slot: int, clusters: list[RrhCluster],
               n_users: int) -> list[np.ndarray]:
    """Per-slot unit-mean exponential power gains toward every cluster antenna."""
    draws = []
    for q, cluster in enumerate(clusters):
        rng = rs.derive(f"zf-fading-{slot}-{q}").generator()
        draws.append(rng.exponential(1.0, (n_users, cluster.n_antennas)))
    return draws


def _bbu_interference(cfg: ScenarioConfig, world: SyntheticWorld, user_xy: np.ndarray,
                      active: bool) -> np.ndarray:
    if not active:
        return np.zeros(user_xy.shape[0])
    d = np.linalg.norm(user_xy - world.bbu_xy[None, :], axis=1)
    d = np.maximum(d, 1.0)
    return cfg.bbu_power_w * d ** (-cfg.pathloss.g2a_exponent)


def _rrh_rates_bits(cfg, world, clusters, assigned, user_xy, fading, interference_active):
    bbu = _bbu_interference(cfg, world, user_xy, interference_active)
    sinr = zfbf_sinr(clusters, assigned, user_xy, fading, cfg.rrh_power_w, bbu,
                     cfg.noise_power_w, cfg.pathloss.g2a_exponent)
    rates = np.zeros(user_xy.shape[0])
    for i, gamma in sinr.items():
        rates[i] = rrh_slot_capacity_bits(np.array([gamma]), cfg.rrh_bandwidth_hz,
                                          cfg.slot_duration_s)
    return rates, sinr


def _rate_target_bps(cfg: ScenarioConfig, cached: bool, fronthaul_bits: float,
                     device_req_bps: float) -> float:
    """Access-rate target for one delivery; inf when the route cannot make it."""
    try:
        req_bits = delay_rate_requirement_bits(cached, cfg, None if cached else fronthaul_bits)
    except InfeasibleDelay:
        return float("inf")
    return qoe_rate_target_bps(req_bits, device_req_bps, cfg.slot_duration_s)


def run_period(cfg: ScenarioConfig, mode: str = "oracle", models=None,
               baseline: str | None = None,
               world: SyntheticWorld | None = None) -> tuple[list[SlotLog], dict]:
    """Simulate one caching period; returns per-slot logs and the summary."""
    if baseline is not None and baseline not in BASELINES:
        raise ValueError(f"unknown baseline {baseline!r}; expected one of {BASELINES}")
    if mode not in ("oracle", "esn"):
        raise ValueError(f"unknown mode {mode!r}")

    world = world if world is not None else SyntheticWorld(cfg)
    rs = RandomSource(cfg.seed).derive("sim")
    t_slots = cfg.slots_per_cache_period
    h = cfg.slots_per_collection
    f_int = cfg.intervals_per_slot
    n_users = cfg.num_users
    n_uavs = 0 if baseline == "no_uav" else cfg.num_uavs
    sim_day = world.first_sim_day
    slot0 = sim_day * t_slots

    # Terrestrial infrastructure: group radio heads into beamforming clusters.
    labels, _ = placement.cluster_users(world.rrh_xy, cfg.num_rrh_clusters,
                                        rs.derive("rrh-grouping"))
    clusters = [RrhCluster(id=q, antennas=world.rrh_xy[labels == q])
                for q in range(cfg.num_rrh_clusters) if np.any(labels == q)]

    if mode == "oracle":
        predictor = OraclePredictor(world)
    else:
        if models is None:
            raise ValueError("esn mode needs trained models")
        content_models, mobility_models = models
        predictor = EsnPredictor(cfg, world, content_models, mobility_models, sim_day)

    screen = np.array([world.screen_factor(u) for u in range(n_users)])
    interference_when_planning = n_uavs > 0

    # ---- planning pass: association and clustering per slot --------------------
    plans: list[placement.AssociationPlan] = []
    member_lists: list[list[list[int]]] = []  # per slot, per uav
    centroids_per_slot: list[np.ndarray] = []
    pred_xy_per_slot: list[np.ndarray] = []
    fading_per_slot = []
    prev_centroids = None
    for s in range(t_slots):
        gs = slot0 + s
        sub = s // h
        pred_xy = np.array([predictor.slot_midpoint(u, gs)
                            for u in range(n_users)]).reshape(n_users, 2)
        pred_xy_per_slot.append(pred_xy)
        fading = _zf_fading(rs, s, clusters, n_users)
        fading_per_slot.append(fading)
        reference = _reference_sets(pred_xy, clusters)
        rates, _ = _rrh_rates_bits(cfg, world, clusters, reference, pred_xy, fading,
                                   interference_when_planning)
        device_req = np.array([
            cfg.device_rate_bps(screen[u], int(np.argmax(predictor.request_distribution(u, sub))))
            for u in range(n_users)])
        plan = placement.associate_rrh(rates, pred_xy, device_req, clusters, cfg)
        plans.append(plan)

        if n_uavs and plan.uav_pool:
            pool_xy = pred_xy[plan.uav_pool]
            init = prev_centroids if prev_centroids is not None else None
            pool_labels, centroids = placement.cluster_users(
                pool_xy, n_uavs, rs.derive(f"kmeans-{s}"), init_centroids=init)
            prev_centroids = centroids
            members = [[plan.uav_pool[j] for j in range(len(plan.uav_pool))
                        if pool_labels[j] == k] for k in range(n_uavs)]
        else:
            centroids = prev_centroids if prev_centroids is not None else np.zeros((max(n_uavs, 1), 2))
            members = [[] for _ in range(n_uavs)]
        member_lists.append(members)
        centroids_per_slot.append(np.array(centroids, copy=True))

    # ---- cache selection (once per period) --------------------------------------
    caches: list[tuple[int, ...]] = []
    base_rates = (np.asarray(cfg.content_base_rates_bps, dtype=float)
                  if cfg.content_base_rates_bps is not None
                  else np.full(cfg.num_contents, cfg.content_base_rate_bps))
    for k in range(n_uavs):
        if baseline == "no_cache":
            caches.append(())
            continue
        if baseline == "random_cache":
            rng = rs.derive(f"random-cache-{k}").generator()
            picks = rng.choice(cfg.num_contents, size=cfg.cache_size, replace=False)
            caches.append(tuple(sorted(int(n) for n in picks)))
            continue
        prob_rows, saving_rows = [], []
        c_r_cached = delay_rate_requirement_bits(True, cfg)
        for s in range(t_slots):
            members = member_lists[s][k]
            if not members:
                continue
            sub = s // h
            proxy = np.array([centroids_per_slot[s][k][0], centroids_per_slot[s][k][1],
                              cfg.min_altitude_m])
            fronthaul = g2a_fronthaul_bits(proxy, world.bbu_xy, cfg.pathloss,
                                           cfg.bbu_power_w, cfg.rrh_bandwidth_hz,
                                           cfg.noise_power_w, cfg.slot_duration_s)
            try:
                c_r_uncached = delay_rate_requirement_bits(False, cfg, fronthaul)
            except InfeasibleDelay:
                c_r_uncached = None
            for u in members:
                pl = float(uav_user_pathloss_db(proxy, pred_xy_per_slot[s][u], cfg.pathloss))
                device_req = screen[u] * base_rates
                saving = placement.delta_power_saving(pl, c_r_cached, c_r_uncached,
                                                      device_req, len(members), cfg)
                prob_rows.append(predictor.request_distribution(u, sub))
                saving_rows.append(saving)
        if prob_rows:
            caches.append(placement.select_cache(k, np.array(prob_rows),
                                                 np.array(saving_rows),
                                                 cfg.cache_size).contents)
        else:
            caches.append(())

    # ---- placement per slot ------------------------------------------------------
    positions_per_slot: list[np.ndarray] = []
    prev_positions: np.ndarray | None = None
    fixed_positions: np.ndarray | None = None
    for s in range(t_slots):
        gs = slot0 + s
        sub = s // h
        positions = np.zeros((n_uavs, 3))
        for k in range(n_uavs):
            members = member_lists[s][k]
            centroid = centroids_per_slot[s][k]
            default = np.array([centroid[0], centroid[1], cfg.min_altitude_m])
            if baseline == "fixed_placement":
                if fixed_positions is None:
                    positions[k] = default
                else:
                    positions[k] = fixed_positions[k]
                continue
            if not members:
                positions[k] = prev_positions[k] if prev_positions is not None else default
                continue
            user_pos = np.stack([predictor.slot_positions(u, gs, f_int) for u in members])
            proxy = default
            fronthaul = g2a_fronthaul_bits(proxy, world.bbu_xy, cfg.pathloss,
                                           cfg.bbu_power_w, cfg.rrh_bandwidth_hz,
                                           cfg.noise_power_w, cfg.slot_duration_s)
            targets = np.empty(len(members))
            for idx, u in enumerate(members):
                p_hat = predictor.request_distribution(u, sub)
                content = int(np.argmax(p_hat))
                device_req = cfg.device_rate_bps(screen[u], content)
                cached = content in caches[k]
                target = _rate_target_bps(cfg, cached, fronthaul, device_req)
                if not np.isfinite(target):
                    # Undeliverable in time over the fronthaul; aim the position
                    # at the feasible (cached-equivalent) requirement instead.
                    target = _rate_target_bps(cfg, True, fronthaul, device_req)
                targets[idx] = target
            regime = placement.closed_form_regime(cfg.min_altitude_m, user_pos)
            if regime == "low" and cfg.pathloss.exponent_nlos != 2.0:
                regime = None
            if regime == "low":
                xy = placement.place_uav_closed_form(user_pos, targets, len(members),
                                                     cfg.uav_bandwidth_hz)
                positions[k] = np.array([xy[0], xy[1], cfg.min_altitude_m])
            else:
                if regime == "high":
                    xy = placement.place_uav_closed_form(user_pos, targets, len(members),
                                                         cfg.uav_bandwidth_hz)
                    init = np.array([xy[0], xy[1],
                                     prev_positions[k][2] if prev_positions is not None
                                     else cfg.min_altitude_m])
                else:
                    init = (prev_positions[k] if prev_positions is not None else default)
                result = placement.place_uav_local_search(
                    user_pos, targets, init, len(members), cfg.pathloss,
                    cfg.uav_bandwidth_hz, cfg.noise_power_w, cfg.min_altitude_m)
                positions[k] = result.position
        if baseline == "fixed_placement" and fixed_positions is None:
            fixed_positions = positions.copy()
        prev_positions = positions
        positions_per_slot.append(positions)

    # ---- delivery and scoring ----------------------------------------------------
    logs: list[SlotLog] = []
    bound_s = delay_lower_bound_s(cfg)
    for s in range(t_slots):
        gs = slot0 + s
        plan = plans[s]
        members = member_lists[s]
        positions = positions_per_slot[s] if n_uavs else np.zeros((0, 3))
        true_xy = np.array([world.position_at(u, gs, 0.5)
                            for u in range(n_users)]).reshape(n_users, 2)
        requests = [world.request_at(u, gs) for u in range(n_users)]

        user_uav = {}
        for k in range(n_uavs):
            for u in members[k]:
                user_uav[u] = k
        fetchers = set()
        for u, k in user_uav.items():
            req = requests[u]
            if req is not None and req not in caches[k]:
                fetchers.add(k)
        n_fetch = len(fetchers)

        # Terrestrial deliveries (admitted sets, true positions, same fading).
        assigned = plan.cluster_members(len(clusters))
        rates_true, _ = _rrh_rates_bits(cfg, world, clusters, assigned, true_xy,
                                        fading_per_slot[s], n_fetch > 0)
        v_fu_bps = cfg.fronthaul_rate_bps / max(plan.n_fr, 1)

        reports: list[QoeReport] = []
        uav_power = np.zeros(max(n_uavs, 1))
        n_requests = n_delivered = n_failures = n_hits = n_uav_deliveries = 0
        for u in range(n_users):
            content = requests[u]
            if content is None:
                reports.append(QoeReport(
                    user=u, content=-1, link="idle", delay_s=0.0, delay_score=0.0,
                    device_score_frac=0.0, qoe=0.0, mos_label="Poor", satisfied=False,
                    delivered=False, power_w=0.0, cache_hit=False, power_feasible=True))
                continue
            n_requests += 1
            device_req = cfg.device_rate_bps(screen[u], content)

            if u in plan.rrh_users:
                access_bits = rates_true[u]
                if access_bits <= 0.0:
                    reports.append(_failure_report(u, content, LINK_RRH))
                    n_failures += 1
                    continue
                delay = (cfg.content_size_bits / v_fu_bps
                         + cfg.slot_duration_s * cfg.content_size_bits / access_bits)
                rate_bps = access_bits / cfg.slot_duration_s
                report = _score(cfg, u, content, LINK_RRH, delay, rate_bps, device_req,
                                power_w=0.0, cache_hit=False, feasible=True)
                reports.append(report)
                n_delivered += report.delivered
                n_failures += not report.delivered
                continue

            if u not in user_uav:
                reports.append(_failure_report(u, content, "unserved"))
                n_failures += 1
                continue

            k = user_uav[u]
            n_served = len(members[k])
            cache_hit = content in caches[k]
            n_uav_deliveries += 1
            n_hits += cache_hit
            fronthaul_bits = None
            if not cache_hit:
                total_fh = g2a_fronthaul_bits(positions[k], world.bbu_xy, cfg.pathloss,
                                              cfg.bbu_power_w, cfg.rrh_bandwidth_hz,
                                              cfg.noise_power_w, cfg.slot_duration_s)
                fronthaul_bits = total_fh / max(n_fetch, 1)
            target = _rate_target_bps(cfg, cache_hit, fronthaul_bits, device_req)
            interval_pos = world.interval_positions(u, gs, f_int)
            pl = uav_user_pathloss_db(positions[k], interval_pos, cfg.pathloss)
            if np.isfinite(target):
                power = min_uav_power_w(pl, target, n_served, cfg.uav_bandwidth_hz,
                                        cfg.noise_power_w)
            else:
                power = np.full(f_int, np.inf)
            feasible = bool(np.all(power <= cfg.uav_max_power_w))
            tx_power = np.minimum(power, cfg.uav_max_power_w)
            snr = uav_user_snr(tx_power, pl, cfg.noise_power_w)
            rates_bps = (cfg.uav_bandwidth_hz / n_served) * np.log2(1.0 + snr)
            access_bits = float(rates_bps.sum() * cfg.slot_duration_s / f_int)
            if access_bits <= 0.0:
                reports.append(_failure_report(u, content,
                                               LINK_UAV_CACHE if cache_hit else LINK_UAV_FRONTHAUL,
                                               power_w=float(tx_power.mean()),
                                               cache_hit=cache_hit))
                uav_power[k] += float(tx_power.mean())
                n_failures += 1
                continue
            delay = cfg.slot_duration_s * cfg.content_size_bits / access_bits
            if not cache_hit:
                delay += cfg.slot_duration_s * cfg.content_size_bits / fronthaul_bits
            mean_power = float(tx_power.mean())
            report = _score(cfg, u, content,
                            LINK_UAV_CACHE if cache_hit else LINK_UAV_FRONTHAUL,
                            delay, rates_bps, device_req, power_w=mean_power,
                            cache_hit=cache_hit, feasible=feasible)
            reports.append(report)
            uav_power[k] += mean_power
            n_delivered += report.delivered
            n_failures += not report.delivered

        log = SlotLog(slot=s, global_slot=gs, reports=reports, n_fr=plan.n_fr,
                      n_fetching=n_fetch,
                      uav_positions=positions if n_uavs else np.zeros((0, 3)),
                      uav_power_w=uav_power[:n_uavs] if n_uavs else np.zeros(0),
                      caches=tuple(caches), requests=n_requests,
                      delivered=n_delivered, failures=n_failures,
                      cache_hits=n_hits, uav_deliveries=n_uav_deliveries)
        log.reconcile()
        # Delivered contents can never beat the system delay bound.
        for r in reports:
            if r.delivered and r.delay_s < bound_s:
                raise SimInvariantError(
                    f"slot {s}: user {r.user} delay {r.delay_s} below bound {bound_s}")
        logs.append(log)

    summary = _summarize(cfg, logs, mode, baseline, predictor, n_uavs, bound_s)
    return logs, summary


def _failure_report(user: int, content: int, link: str, power_w: float = 0.0,
                    cache_hit: bool = False) -> QoeReport:
    return QoeReport(user=user, content=content, link=link, delay_s=float("inf"),
                     delay_score=0.0, device_score_frac=0.0, qoe=0.0,
                     mos_label="Poor", satisfied=False, delivered=False,
                     power_w=power_w, cache_hit=cache_hit, power_feasible=True)


def _score(cfg: ScenarioConfig, user: int, content: int, link: str, delay: float,
           rates_bps, device_req: float, power_w: float, cache_hit: bool,
           feasible: bool) -> QoeReport:
    if delay > cfg.slot_duration_s:
        report = _failure_report(user, content, link, power_w=power_w, cache_hit=cache_hit)
        return dataclasses.replace(report, delay_s=delay, power_feasible=feasible)
    d_score = delay_score(delay, cfg)
    rates = np.atleast_1d(np.asarray(rates_bps, dtype=float))
    device_frac = float(np.mean(rates >= device_req))
    q = cfg.qoe_weight_delay * d_score + cfg.qoe_weight_device * device_frac
    return QoeReport(user=user, content=content, link=link, delay_s=delay,
                     delay_score=d_score, device_score_frac=device_frac, qoe=q,
                     mos_label=mos_label(q), satisfied=q >= SATISFIED_QOE, delivered=True,
                     power_w=power_w, cache_hit=cache_hit, power_feasible=feasible)


def _summarize(cfg, logs, mode, baseline, predictor, n_uavs, bound_s) -> dict:
    total_power = float(sum(log.uav_power_w.sum() for log in logs))
    requests = sum(log.requests for log in logs)
    satisfied = sum(1 for log in logs for r in log.reports if r.satisfied)
    uav_deliveries = sum(log.uav_deliveries for log in logs)
    hits = sum(log.cache_hits for log in logs)
    failures = sum(log.failures for log in logs)
    infeasible = sum(1 for log in logs for r in log.reports if not r.power_feasible)
    delays = [r.delay_s for log in logs for r in log.reports if r.delivered]
    altitudes = [float(log.uav_positions[k, 2]) for log in logs for k in range(n_uavs)]
    return {
        "schema_version": SUMMARY_SCHEMA_VERSION,
        "mode": mode,
        "baseline": baseline or "none",
        "seed": cfg.seed,
        "slots": len(logs),
        "num_users": cfg.num_users,
        "num_uavs": n_uavs,
        "cache_size": cfg.cache_size,
        "total_uav_power_w": total_power,
        "avg_uav_power_w": total_power / (n_uavs * len(logs)) if n_uavs and logs else 0.0,
        "satisfied_fraction": satisfied / requests if requests else 0.0,
        "cache_hit_rate": hits / uav_deliveries if uav_deliveries else 0.0,
        "requests": requests,
        "failures": failures,
        "uav_deliveries": uav_deliveries,
        "power_cap_violations": infeasible,
        "avg_altitude_m": float(np.mean(altitudes)) if altitudes else 0.0,
        "n_fr_mean": float(np.mean([log.n_fr for log in logs])) if logs else 0.0,
        "delay_lower_bound_s": bound_s,
        "min_delivered_delay_s": min(delays) if delays else None,
        "prediction_gap": predictor.gap_metrics(),
    }


# -- sweeps and serialization -----------------------------------------------------

SWEEP_PARAMS = {"users": "num_users", "uavs": "num_uavs", "cache": "cache_size"}

SWEEP_COLUMNS = ("param", "value", "total_uav_power_w", "avg_uav_power_w",
                 "satisfied_fraction", "cache_hit_rate", "avg_altitude_m")


def sweep(cfg: ScenarioConfig, param: str, values, mode: str = "oracle",
          models=None, baseline: str | None = None) -> list[dict]:
    """Re-run the period for each swept value with the same seed; one row per value."""
    if param not in SWEEP_PARAMS:
        raise ValueError(f"unknown sweep parameter {param!r}; expected one of {sorted(SWEEP_PARAMS)}")
    rows = []
    for value in values:
        swept = dataclasses.replace(cfg, **{SWEEP_PARAMS[param]: int(value)})
        violations = validate(swept)
        if violations:
            raise ConfigError([f"sweep value {param}={value}: {v}" for v in violations])
        _, summary = run_period(swept, mode=mode, models=models, baseline=baseline)
        rows.append({
            "param": param,
            "value": int(value),
            "total_uav_power_w": summary["total_uav_power_w"],
            "avg_uav_power_w": summary["avg_uav_power_w"],
            "satisfied_fraction": summary["satisfied_fraction"],
            "cache_hit_rate": summary["cache_hit_rate"],
            "avg_altitude_m": summary["avg_altitude_m"],
        })
    return rows


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format(value, ".9g")
    return str(value)


def slots_csv_text(logs: list[SlotLog]) -> str:
    lines = [",".join(SLOTS_COLUMNS)]
    for log in logs:
        for r in log.reports:
            lines.append(",".join(_fmt(v) for v in (
                log.slot, r.user, r.content, r.link, r.delivered, r.delay_s,
                r.delay_score, r.device_score_frac, r.qoe, r.mos_label,
                r.satisfied, r.power_w, r.cache_hit, r.power_feasible)))
    return "\n".join(lines) + "\n"


def summary_json_text(summary: dict) -> str:
    def convert(obj):
        if isinstance(obj, float):
            return float(format(obj, ".9g"))
        if isinstance(obj, dict):
            return {k: convert(v) for k, v in obj.items()}
        return obj

    return json.dumps(convert(summary), indent=2, sort_keys=True) + "\n"


def sweep_csv_text(rows: list[dict]) -> str:
    lines = [",".join(SWEEP_COLUMNS)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in SWEEP_COLUMNS))
    return "\n".join(lines) + "\n"
