#!/usr/bin/env python3
"""End-to-end demo: one caching period against every ablation baseline.

Runs the desk-scale scenario in oracle mode and prints a comparison table of
total UAV power, satisfied-QoE fraction, and cache hit rate.
"""

import argparse
import time

from uavcache import sim
from uavcache.config import DESK_PRESET, load_config_dict, merge_documents

SCENARIO = {
    "num_users": 70,
    "num_uavs": 5,
    "cache_size": 5,
    "generators": {"request_concentration": 2.0},
}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=2024)
    args = parser.parse_args()

    cfg = load_config_dict(merge_documents(DESK_PRESET, {**SCENARIO, "seed": args.seed}))
    print(f"{'variant':<18} {'power_w':>10} {'satisfied':>10} {'hit_rate':>9} {'time_s':>7}")
    for baseline in (None, "no_cache", "random_cache", "fixed_placement", "no_uav"):
        t0 = time.time()
        _, summary = sim.run_period(cfg, mode="oracle", baseline=baseline)
        print(f"{baseline or 'proposed':<18} {summary['total_uav_power_w']:>10.4f} "
              f"{summary['satisfied_fraction']:>10.3f} {summary['cache_hit_rate']:>9.3f} "
              f"{time.time() - t0:>7.1f}")


if __name__ == "__main__":
    main()
