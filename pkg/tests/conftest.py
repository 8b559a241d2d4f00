import pytest

from uavcache.config import DESK_PRESET, ScenarioConfig, load_config_dict, merge_documents


def desk_config(**overrides) -> ScenarioConfig:
    """Desk-scale scenario with optional leaf overrides (nested dicts merge)."""
    return load_config_dict(merge_documents(DESK_PRESET, overrides))


@pytest.fixture
def tiny_cfg() -> ScenarioConfig:
    """Small but structurally complete scenario for fast end-to-end tests."""
    return desk_config(
        num_users=10, num_rrhs=8, num_rrh_clusters=2, num_uavs=2, cache_size=3,
        intervals_per_slot=10, slots_per_collection=3, slots_per_cache_period=12,
        esn={"reservoir_size": 60, "training_length": 60, "washout": 10},
        generators={"training_weeks": 2, "request_concentration": 2.0},
    )
