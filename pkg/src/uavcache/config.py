"""Scenario configuration, domain state types, and deterministic random streams.

Every tunable constant of the simulator lives in :class:`ScenarioConfig` and its
nested blocks.  Configs are immutable, JSON round-trippable, and validated as a
whole: :func:`load_config` reports *all* violated invariants with their field
paths instead of stopping at the first one.

All values in config files are SI (meters, watts, hertz, bits, seconds); dB
conversions happen inside the channel code only.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np


class ConfigError(ValueError):
    """Raised when a config document cannot be parsed or violates invariants."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class ChannelParams:
    """Radio propagation constants for the air-to-ground and terrestrial links.

    ``env_x``/``env_y`` are the urban-environment constants of the logistic
    line-of-sight probability curve (elevation angle in degrees).  The
    ground-to-air fronthaul uses a plain power-law gain ``d**-g2a_exponent``
    with an extra attenuation factor ``g2a_nlos_factor`` (>= 1) on NLoS links.
    """

    fs_ref_distance_m: float = 5.0
    carrier_hz: float = 38e9
    exponent_los: float = 2.0
    exponent_nlos: float = 2.4
    shadow_std_los_db: float = 5.3
    shadow_std_nlos_db: float = 5.27
    env_x: float = 11.9
    env_y: float = 0.13
    g2a_exponent: float = 2.0
    g2a_nlos_factor: float = 100.0


@dataclass(frozen=True)
class EsnConfig:
    """Hyperparameters of one echo-state network with conceptor memory.

    ``input_dim``/``output_dim`` are None in the scenario-level template and
    filled in per task (content prediction vs mobility prediction) when a model
    is built.  ``context_dim`` is the number of user-context features fed to
    the reservoir and ``horizon`` the number of future collection points a
    mobility model predicts.
    """

    reservoir_size: int = 1000
    input_dim: int | None = None
    output_dim: int | None = None
    spectral_radius: float = 0.9
    density: float = 0.1
    input_scale: float = 1.0
    aperture: float = 15.0
    ridge: float = 0.01
    washout: int = 50
    training_length: int = 1000
    context_dim: int = 4
    horizon: int = 12


@dataclass(frozen=True)
class GeneratorConfig:
    """Knobs of the synthetic mobility / context / request generators.

    Mobility: each user follows a daily schedule of anchor locations (one
    schedule per day type, weekday vs weekend), visited at constant speed
    between collection instants, with Gaussian noise on every collected
    waypoint.  Speeds are interpreted on the narrative clock where one
    collection interval corresponds to one hour.

    Requests: each user draws one content per slot from a concentrated
    (zipf-like) base distribution over a user-specific content ranking,
    reshaped by the hour of day: work-class contents are boosted during
    working hours, entertainment-class contents outside them.
    """

    waypoints_per_day: int = 3
    speed_min_mps: float = 0.5
    speed_max_mps: float = 1.5
    position_noise_m: float = 5.0
    request_concentration: float = 1.2
    taste_spread: float = 0.5
    work_hour_boost: float = 3.0
    request_probability: float = 1.0
    training_weeks: int = 4


@dataclass(frozen=True)
class ScenarioConfig:
    """Full description of one simulated deployment.

    Defaults reproduce the reference urban setup: a 500 m disk, 70 users,
    20 radio heads in 4 zero-forcing clusters, 5 cache-equipped UAVs and a
    25-content catalog.
    """

    area_radius_m: float = 500.0
    num_users: int = 70
    num_rrhs: int = 20
    num_rrh_clusters: int = 4
    num_uavs: int = 5
    num_contents: int = 25
    cache_size: int = 1
    content_size_bits: float = 1e6
    intervals_per_slot: int = 1000
    slots_per_collection: int = 10
    slots_per_cache_period: int = 120
    slot_duration_s: float = 1.0
    rrh_power_w: float = 0.1
    bbu_power_w: float = 1.0
    uav_max_power_w: float = 20.0
    rrh_bandwidth_hz: float = 1e6
    uav_bandwidth_hz: float = 1e9
    noise_power_w: float = 10.0 ** (-12.5)
    fronthaul_rate_bps: float = 1e8
    qoe_weight_delay: float = 0.5
    qoe_weight_device: float = 0.5
    mos_min: float = 0.8
    content_base_rate_bps: float = 5e6
    content_base_rates_bps: tuple[float, ...] | None = None
    screen_factors: tuple[float, ...] = (0.5, 1.0, 1.5)
    min_altitude_m: float = 100.0
    pathloss: ChannelParams = field(default_factory=ChannelParams)
    esn: EsnConfig = field(default_factory=EsnConfig)
    generators: GeneratorConfig = field(default_factory=GeneratorConfig)
    seed: int = 20240001

    # -- derived quantities -------------------------------------------------

    @property
    def interval_duration_s(self) -> float:
        return self.slot_duration_s / self.intervals_per_slot

    @property
    def subperiods_per_period(self) -> int:
        return self.slots_per_cache_period // self.slots_per_collection

    def device_rate_bps(self, screen_factor: float, content: int) -> float:
        """Per-content rate floor for a device with the given screen factor."""
        if self.content_base_rates_bps is not None:
            base = self.content_base_rates_bps[content]
        else:
            base = self.content_base_rate_bps
        return screen_factor * base


# Desk-scale preset applied by the CLI unless --paper-scale is given.  Fewer
# intervals and a shorter period keep runs CI-friendly; the smaller content and
# device rates keep the shared wireless fronthaul feasible for up to 7 UAVs at
# this compressed timescale while preserving the cached/uncached rate contrast.
DESK_PRESET: dict[str, Any] = {
    "intervals_per_slot": 100,
    "slots_per_collection": 6,
    "slots_per_cache_period": 24,
    "content_size_bits": 5e5,
    "content_base_rate_bps": 1.5e6,
    "esn": {"reservoir_size": 200, "training_length": 400},
}


def _positive(name: str, value: float, out: list[str]) -> None:
    if not (value > 0):
        out.append(f"{name}: must be strictly positive, got {value!r}")


def validate(cfg: ScenarioConfig) -> list[str]:
    """Return the list of violated invariants (empty when the config is valid)."""
    v: list[str] = []
    if not (cfg.num_users >= cfg.num_uavs >= 1):
        v.append(f"num_users/num_uavs: need num_users >= num_uavs >= 1, got {cfg.num_users}/{cfg.num_uavs}")
    if cfg.cache_size > cfg.num_contents:
        v.append(f"cache_size: cache size exceeds catalog ({cfg.cache_size} > {cfg.num_contents})")
    if cfg.cache_size < 1:
        v.append(f"cache_size: must be at least 1, got {cfg.cache_size}")
    if cfg.qoe_weight_delay + cfg.qoe_weight_device != 1.0:
        v.append(
            "qoe_weight_delay/qoe_weight_device: weights must sum to 1, got "
            f"{cfg.qoe_weight_delay} + {cfg.qoe_weight_device}"
        )
    for name in (
        "area_radius_m",
        "content_size_bits",
        "slot_duration_s",
        "rrh_power_w",
        "bbu_power_w",
        "uav_max_power_w",
        "rrh_bandwidth_hz",
        "uav_bandwidth_hz",
        "noise_power_w",
        "fronthaul_rate_bps",
        "content_base_rate_bps",
        "min_altitude_m",
    ):
        _positive(name, getattr(cfg, name), v)
    for name in ("num_rrhs", "num_rrh_clusters", "num_contents", "intervals_per_slot",
                 "slots_per_collection", "slots_per_cache_period"):
        if getattr(cfg, name) < 1:
            v.append(f"{name}: must be a positive integer, got {getattr(cfg, name)}")
    if not (0.0 < cfg.mos_min <= 1.0):
        v.append(f"mos_min: must lie in (0, 1], got {cfg.mos_min}")
    if cfg.slots_per_collection >= 1 and cfg.slots_per_cache_period % cfg.slots_per_collection != 0:
        v.append(
            "slots_per_collection: must divide slots_per_cache_period "
            f"({cfg.slots_per_collection} does not divide {cfg.slots_per_cache_period})"
        )
    if cfg.content_base_rates_bps is not None and len(cfg.content_base_rates_bps) != cfg.num_contents:
        v.append(
            "content_base_rates_bps: need one rate per content "
            f"({len(cfg.content_base_rates_bps)} given, {cfg.num_contents} contents)"
        )
    if any(s <= 0 for s in cfg.screen_factors):
        v.append(f"screen_factors: all factors must be positive, got {cfg.screen_factors}")

    p = cfg.pathloss
    if not (p.exponent_nlos >= p.exponent_los > 0):
        v.append(
            "pathloss.exponent_los/exponent_nlos: need exponent_nlos >= exponent_los > 0, "
            f"got {p.exponent_los}/{p.exponent_nlos}"
        )
    if p.g2a_nlos_factor < 1:
        v.append(f"pathloss.g2a_nlos_factor: must be >= 1, got {p.g2a_nlos_factor}")
    if p.shadow_std_los_db < 0 or p.shadow_std_nlos_db < 0:
        v.append("pathloss.shadow_std_los_db/shadow_std_nlos_db: must be nonnegative")
    if p.env_x <= 0 or p.env_y <= 0:
        v.append(f"pathloss.env_x/env_y: must be positive, got {p.env_x}/{p.env_y}")
    _positive("pathloss.fs_ref_distance_m", p.fs_ref_distance_m, v)
    _positive("pathloss.carrier_hz", p.carrier_hz, v)

    e = cfg.esn
    if e.reservoir_size < 1:
        v.append(f"esn.reservoir_size: must be positive, got {e.reservoir_size}")
    if e.washout >= e.training_length:
        v.append(f"esn.washout: must be smaller than training_length ({e.washout} >= {e.training_length})")
    if e.aperture <= 0:
        v.append(f"esn.aperture: must be positive, got {e.aperture}")
    if e.ridge < 0:
        v.append(f"esn.ridge: must be nonnegative, got {e.ridge}")

    g = cfg.generators
    if g.position_noise_m < 0:
        v.append(f"generators.position_noise_m: must be nonnegative, got {g.position_noise_m}")
    if not (0.0 <= g.request_probability <= 1.0):
        v.append(f"generators.request_probability: must lie in [0, 1], got {g.request_probability}")
    if g.training_weeks < 1:
        v.append(f"generators.training_weeks: must be at least 1, got {g.training_weeks}")
    if not (0 < g.speed_min_mps <= g.speed_max_mps):
        v.append(f"generators.speed bounds: need 0 < min <= max, got {g.speed_min_mps}/{g.speed_max_mps}")
    return v


_NESTED = {"pathloss": ChannelParams, "esn": EsnConfig, "generators": GeneratorConfig}
_TUPLE_FIELDS = {"screen_factors", "content_base_rates_bps"}


def _build(cls, doc: dict, path: str, violations: list[str]):
    known = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in doc.items():
        where = f"{path}{key}"
        if key not in known:
            violations.append(f"{where}: unknown field")
            continue
        if key in _NESTED:
            if not isinstance(value, dict):
                violations.append(f"{where}: expected an object")
                continue
            kwargs[key] = _build(_NESTED[key], value, where + ".", violations)
        elif key in _TUPLE_FIELDS and value is not None:
            kwargs[key] = tuple(value)
        else:
            kwargs[key] = value
    return cls(**kwargs)


def merge_documents(base: dict, override: dict) -> dict:
    """Deep-merge two config documents; ``override`` wins on leaves."""
    out = dict(base)
    for key, value in override.items():
        if key in out and isinstance(out[key], dict) and isinstance(value, dict):
            out[key] = merge_documents(out[key], value)
        else:
            out[key] = value
    return out


def load_config_dict(doc: dict) -> ScenarioConfig:
    violations: list[str] = []
    cfg = _build(ScenarioConfig, doc, "", violations)
    violations.extend(validate(cfg))
    if violations:
        raise ConfigError(violations)
    return cfg


def load_config(text: str) -> ScenarioConfig:
    """Parse a JSON config document; unset fields take the built-in defaults."""
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError([f"parse failure: {exc}"]) from exc
    if not isinstance(doc, dict):
        raise ConfigError(["parse failure: top-level value must be an object"])
    return load_config_dict(doc)


def serialize(cfg: ScenarioConfig) -> str:
    """Emit the config as a JSON document; load_config(serialize(c)) == c."""
    doc = dataclasses.asdict(cfg)
    for key in _TUPLE_FIELDS:
        if doc.get(key) is not None:
            doc[key] = list(doc[key])
    return json.dumps(doc, indent=2, sort_keys=True)


# -- state types -------------------------------------------------------------


@dataclass
class UserState:
    """One ground user: position, static context, and current service state."""

    id: int
    position: np.ndarray  # (2,) meters
    context: np.ndarray  # static demographic features in [-1, 1]
    screen_factor: float
    current_request: int | None = None
    association: tuple[str, int] | None = None  # ("rrh", q) or ("uav", k)


@dataclass
class UavState:
    """One aerial base station: 3-D position, cache contents, served users."""

    id: int
    position: np.ndarray  # (3,) meters, z >= min altitude
    cache: tuple[int, ...] = ()
    served_users: tuple[int, ...] = ()


@dataclass
class RrhCluster:
    """A zero-forcing cluster of radio heads acting as one distributed array."""

    id: int
    antennas: np.ndarray  # (R_q, 2) meters
    served_users: tuple[int, ...] = ()

    @property
    def n_antennas(self) -> int:
        return int(self.antennas.shape[0])


def check_uav_constraints(uav: UavState, cfg: ScenarioConfig) -> list[str]:
    """Check the per-UAV feasibility predicates (altitude floor, cache shape)."""
    problems = []
    if uav.position[2] < cfg.min_altitude_m:
        problems.append(f"uav {uav.id}: altitude {uav.position[2]:.3f} below floor {cfg.min_altitude_m}")
    if len(uav.cache) != len(set(uav.cache)):
        problems.append(f"uav {uav.id}: cache holds duplicate contents {uav.cache}")
    if len(uav.cache) > cfg.cache_size:
        problems.append(f"uav {uav.id}: cache holds {len(uav.cache)} contents, limit {cfg.cache_size}")
    return problems


# -- deterministic random streams --------------------------------------------


@dataclass(frozen=True)
class RandomSource:
    """A named, reproducible random stream.

    ``derive`` produces an independent child stream; the same (seed, label
    path) always yields the same sequence regardless of the order or thread in
    which streams are consumed.
    """

    seed: int
    path: tuple[str, ...] = ()

    def derive(self, label: str) -> "RandomSource":
        if not label:
            raise ValueError("stream label must be nonempty")
        return RandomSource(self.seed, self.path + (label,))

    def generator(self) -> np.random.Generator:
        material = repr(self.seed) + "\x1f" + "\x1f".join(self.path)
        digest = hashlib.sha256(material.encode("utf-8")).digest()
        return np.random.default_rng(int.from_bytes(digest[:16], "little"))
