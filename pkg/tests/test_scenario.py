"""Scenario parsing/validation and seeded deployment."""

from collections import Counter

import pytest

from regionsim.scenario import (
    ScenarioConfig,
    ScenarioError,
    deploy,
    load_scenario,
    scenario_to_dict,
)


def write(tmp_path, text, name="scenario.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


# -- config --------------------------------------------------------------------


def test_empty_file_gives_defaults(tmp_path):
    config = load_scenario(write(tmp_path, ""))
    assert config == ScenarioConfig()
    assert config.area_width == 160.0
    assert config.region_size == 40.0
    assert config.node_count == 140
    assert (config.sink_x, config.sink_y) == (140.0, 60.0)
    assert config.sessions == 15
    assert config.sim_duration_s == 8400.0
    assert config.init_phase_s == 30.0
    assert config.run_count == 10


def test_sections_override_defaults(tmp_path):
    config = load_scenario(
        write(
            tmp_path,
            "[area]\nwidth = 80\nheight = 80\n"
            "[nodes]\ncount = 16\nsink_x = 60\nsink_y = 30\n"
            "[energy]\np_rx_mw = 90\n"
            "[traffic]\nsessions = 2\nprotocol = dt\n",
        )
    )
    assert config.area_width == 80.0
    assert config.node_count == 16
    assert config.energy.p_rx_mw == 90.0
    assert config.sessions == 2
    assert config.protocol == "dt"


def test_indivisible_region_rejected(tmp_path):
    with pytest.raises(ScenarioError, match="does not divide"):
        load_scenario(write(tmp_path, "[area]\nregion_size = 50\n"))


def test_unknown_field_rejected(tmp_path):
    with pytest.raises(ScenarioError, match="unknown field 'bogus'"):
        load_scenario(write(tmp_path, "[area]\nbogus = 1\n"))


def test_unknown_section_rejected(tmp_path):
    with pytest.raises(ScenarioError, match=r"unknown section \[radio\]"):
        load_scenario(write(tmp_path, "[radio]\nx = 1\n"))


def test_unparseable_value_names_field(tmp_path):
    with pytest.raises(ScenarioError, match="'count'"):
        load_scenario(write(tmp_path, "[nodes]\ncount = many\n"))


def test_missing_file_rejected(tmp_path):
    with pytest.raises(ScenarioError, match="cannot read"):
        load_scenario(tmp_path / "absent.ini")


def test_node_count_below_regions_rejected():
    with pytest.raises(ScenarioError, match="below the region count"):
        ScenarioConfig(node_count=15)


def test_node_count_35_accepted():
    config = ScenarioConfig(node_count=35)
    assert config.region_count == 16


def test_bad_protocol_rejected():
    with pytest.raises(ScenarioError, match="protocol"):
        ScenarioConfig(protocol="flood")


def test_sink_outside_area_rejected():
    with pytest.raises(ScenarioError, match="outside the area"):
        ScenarioConfig(sink_x=500.0)


def test_config_snapshot_is_flat_and_sorted():
    snap = scenario_to_dict(ScenarioConfig())
    keys = list(snap)
    assert keys == sorted(keys)
    assert snap["energy.p_rx_mw"] == 120.0
    assert snap["node_count"] == 140


# -- deployment ------------------------------------------------------------------


def test_one_boundary_node_per_region():
    config = ScenarioConfig(node_count=16)
    d = deploy(config, seed=4)
    regions = [d.nodes[s].region_id for s in d.seeds]
    assert sorted(regions) == list(range(16))
    assert len(d.seeds) == 16
    assert all(d.nodes[s].is_boundary_node for s in d.seeds)


def test_deploy_deterministic():
    config = ScenarioConfig()
    a, b = deploy(config, seed=12), deploy(config, seed=12)
    assert a == b
    c = deploy(config, seed=13)
    assert a != c


def test_deploy_round_robin_counts():
    config = ScenarioConfig(node_count=140)
    d = deploy(config, seed=1)
    counts = Counter(d.nodes[v].region_id for v in d.sensor_ids)
    assert set(counts.values()) == {8, 9}
    assert sum(counts.values()) == 140
    assert sorted(counts) == list(range(16))


def test_positions_stay_inside_their_region():
    config = ScenarioConfig(node_count=64)
    d = deploy(config, seed=9)
    for v in d.sensor_ids:
        n = d.nodes[v]
        col, row = n.region_id % 4, n.region_id // 4
        assert col * 40 <= n.x <= (col + 1) * 40
        assert row * 40 <= n.y <= (row + 1) * 40


def test_sink_is_extra_pinned_node():
    config = ScenarioConfig(node_count=35)
    d = deploy(config, seed=2)
    sink = d.nodes[d.sink_id]
    assert d.sink_id == 35
    assert (sink.x, sink.y) == (140.0, 60.0)
    assert not sink.is_boundary_node
    assert d.sink_id not in d.seeds
    assert len(d.sensor_ids) == 35
