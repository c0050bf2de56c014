"""Simulation harness: runs, duty cycling, deaths, batches and output files."""

import filecmp
from dataclasses import replace

import pytest

from regionsim.scenario import ScenarioConfig
from regionsim.sim import (
    BatchReport,
    coverage_series,
    emit_outputs,
    run,
    run_batch,
)

SMALL = ScenarioConfig(
    area_width=80.0,
    area_height=80.0,
    region_size=40.0,
    node_count=18,
    radio_range=120.0,
    sensing_range=30.0,
    sink_x=60.0,
    sink_y=30.0,
    battery_j=60.0,
    sessions=3,
    sim_duration_s=300.0,
    init_phase_s=30.0,
    report_interval_s=60.0,
    protocol="res",
    seed=7,
    run_count=3,
)


def conservation_residual(report, budget):
    worst = 0.0
    for _, snapshot in report.ledger_snapshots:
        for _, tx, rx, sense, sleep, remaining in snapshot:
            worst = max(worst, abs(budget - (remaining + tx + rx + sense + sleep)))
    return worst


def test_adjacent_sessions_deliver_everything():
    report = run(SMALL)
    assert report.sessions_established == 3
    assert report.delivery_ratio == 1.0
    assert report.generated == 3 * 270  # 3 sessions, 1 pkt/s over 270 s


def test_zero_sessions_only_flood_and_sleep():
    config = replace(SMALL, sessions=0, init_phase_s=0.0)
    report = run(config)
    assert report.generated == 0
    flood_j = report.totals_by_mode["tx"] + report.totals_by_mode["rx"]
    assert flood_j > 0.0  # setup flood is still paid
    assert report.totals_by_mode["sense"] == 0.0
    assert report.totals_by_mode["sleep"] > 0.0
    assert report.total_energy_j == pytest.approx(
        flood_j + report.totals_by_mode["sleep"]
    )


def test_init_phase_only_sink_neighbors_sense():
    # short range so that sink adjacency is a strict subset; snapshot the
    # ledger exactly at the end of the init phase
    config = replace(
        SMALL,
        radio_range=30.0,
        sim_duration_s=60.0,
        init_phase_s=30.0,
        report_interval_s=30.0,
        sessions=0,
    )
    report = run(config)
    t, snapshot = report.ledger_snapshots[1]
    assert t == 30.0
    sensing = {row[0] for row in snapshot if row[3] > 0}
    sleeping = {row[0] for row in snapshot if row[4] > 0}
    assert sensing and sleeping
    assert sensing.isdisjoint(sleeping)
    from regionsim.graph import build_unit_disk_digraph, neighborhoods
    from regionsim.scenario import deploy

    d = deploy(config, config.seed)
    g = build_unit_disk_digraph([d.nodes[v] for v in sorted(d.nodes)])
    adjacent = {v for v in neighborhoods(g, d.sink_id).all_nodes if v != d.sink_id}
    assert sensing == adjacent


def test_comparators_keep_all_sensors_sensing():
    report = run(replace(SMALL, protocol="dt"))
    _, snapshot = report.ledger_snapshots[-1]
    assert all(row[3] > 0 for row in snapshot)  # every sensor sensed


def test_res_sleeps_off_route_nodes():
    report = run(SMALL)
    on_routes = set()
    for s in report.sessions:
        on_routes.update(v for v in s.vertices if v != s.sink)
    _, snapshot = report.ledger_snapshots[-1]
    for node, tx, rx, sense, sleep, _ in snapshot:
        if node not in on_routes:
            # off-route: slept the whole session phase
            assert sleep > 0
    assert len(on_routes) < len(snapshot)  # somebody actually slept


def test_energy_conservation_within_tolerance():
    for proto in ("res", "dt", "mte", "merr", "or"):
        report = run(replace(SMALL, protocol=proto))
        assert conservation_residual(report, SMALL.battery_j) < 1e-9


def test_total_matches_ledger_sum_exactly():
    report = run(SMALL)
    _, snapshot = report.ledger_snapshots[-1]
    total = 0.0
    for _, tx, rx, sense, sleep, _ in snapshot:
        total += tx + rx + sense + sleep
    assert total == report.total_energy_j


def test_battery_death_stops_forwarding():
    config = replace(SMALL, battery_j=0.35, sessions=2, sim_duration_s=600.0)
    report = run(config)
    assert report.deaths
    assert report.lifetime_s == report.deaths[0][0]
    assert report.lifetime_s < 600.0
    assert report.delivery_ratio < 1.0
    # dead nodes never go meaningfully negative
    _, snapshot = report.ledger_snapshots[-1]
    for _, _, _, _, _, remaining in snapshot:
        assert remaining > -0.05


def test_dead_network_has_zero_coverage():
    # tiny battery: every node exhausts during/shortly after the init phase
    config = replace(SMALL, battery_j=0.35, sessions=3, sim_duration_s=900.0)
    report = run(config)
    series = coverage_series(report)
    assert series[0][1] == pytest.approx(100.0, abs=1.0)
    assert len(report.deaths) == SMALL.node_count
    assert series[-1][1] == 0.0


def test_run_deterministic():
    a = run(SMALL)
    b = run(SMALL)
    assert a.intervals == b.intervals
    assert a.deaths == b.deaths
    assert a.total_energy_j == b.total_energy_j
    assert [s.energy_j for s in a.sessions] == [s.energy_j for s in b.sessions]


def test_interval_rows_cover_duration():
    report = run(SMALL)
    times = [row.t_s for row in report.intervals]
    assert times == [0.0, 60.0, 120.0, 180.0, 240.0, 300.0]
    assert all(
        a <= b for a, b in zip(times, times[1:])
    )


def test_delivery_ratio_in_unit_interval():
    for proto in ("res", "dt", "mte"):
        report = run(replace(SMALL, protocol=proto))
        assert 0.0 <= report.delivery_ratio <= 1.0


def test_flood_stats_only_for_res():
    assert run(SMALL).flood is not None
    assert run(replace(SMALL, protocol="dt")).flood is None


def test_run_batch_single_equals_run():
    config = replace(SMALL, run_count=1)
    batch = run_batch(config)
    single = run(config)
    assert isinstance(batch, BatchReport)
    assert len(batch.runs) == 1
    assert batch.runs[0].total_energy_j == single.total_energy_j
    mean, std = batch.metrics["total_energy_j"]
    assert mean == pytest.approx(single.total_energy_j)
    assert std == 0.0


def test_run_batch_aggregates_run_count_runs():
    batch = run_batch(SMALL)
    assert len(batch.runs) == SMALL.run_count
    assert batch.seeds == (7, 8, 9)
    for name in ("total_energy_j", "delivery_ratio", "lifetime_s"):
        mean, std = batch.metrics[name]
        values = {
            "total_energy_j": [r.total_energy_j for r in batch.runs],
            "delivery_ratio": [r.delivery_ratio for r in batch.runs],
            "lifetime_s": [r.lifetime_s for r in batch.runs],
        }[name]
        assert mean == pytest.approx(sum(values) / len(values))


def test_batches_at_different_base_seeds_agree_within_bands():
    b1 = run_batch(SMALL)
    b2 = run_batch(replace(SMALL, seed=107))
    m1, s1 = b1.metrics["total_energy_j"]
    m2, s2 = b2.metrics["total_energy_j"]
    assert abs(m1 - m2) <= 2 * (s1 + s2) + 1e-9


def test_default_scenario_completes_quickly():
    import time

    t0 = time.time()
    report = run(ScenarioConfig(), seed=2)
    assert time.time() - t0 < 60.0
    assert report.sessions_established > 0


# -- outputs ---------------------------------------------------------------------


def test_emit_outputs_files(tmp_path):
    report = run(SMALL)
    paths = emit_outputs(report, tmp_path / "out")
    names = {p.name for p in paths}
    assert names == {"summary.csv", "sessions.csv", "energy.csv", "report.txt"}
    summary = (tmp_path / "out" / "summary.csv").read_text().splitlines()
    assert summary[0].startswith("t_s,coverage_pct,alive")
    assert len(summary) == 1 + len(report.intervals)
    energy = (tmp_path / "out" / "energy.csv").read_text().splitlines()
    assert energy[0] == "t_s,node_id,tx_j,rx_j,sense_j,sleep_j,remaining_j"
    assert len(energy) == 1 + len(report.ledger_snapshots) * SMALL.node_count


def test_zero_sessions_gives_header_only_sessions_csv(tmp_path):
    report = run(replace(SMALL, sessions=0))
    emit_outputs(report, tmp_path / "out")
    lines = (tmp_path / "out" / "sessions.csv").read_text().splitlines()
    assert lines == [
        "session_id,source,sink,protocol,status,hops,packet_energy_j,"
        "generated,delivered,energy_j"
    ]


def test_emit_outputs_byte_identical(tmp_path):
    emit_outputs(run(SMALL), tmp_path / "a")
    emit_outputs(run(SMALL), tmp_path / "b")
    for name in ("summary.csv", "sessions.csv", "energy.csv", "report.txt"):
        assert filecmp.cmp(tmp_path / "a" / name, tmp_path / "b" / name, shallow=False)


def test_flood_trace_emitted_when_enabled(tmp_path):
    config = replace(SMALL, flood_trace=True)
    report = run(config)
    paths = emit_outputs(report, tmp_path / "out")
    trace = tmp_path / "out" / "flood_trace.csv"
    assert trace in paths
    lines = trace.read_text().splitlines()
    assert lines[0] == "round,sender,receiver,region,hop,action"
    assert len(lines) > 1


def test_emit_batch_outputs(tmp_path):
    batch = run_batch(replace(SMALL, run_count=2))
    paths = emit_outputs(batch, tmp_path / "out")
    assert (tmp_path / "out" / "batch_summary.csv") in paths
    assert (tmp_path / "out" / "run_7" / "summary.csv").exists()
    assert (tmp_path / "out" / "run_8" / "summary.csv").exists()
    lines = (tmp_path / "out" / "batch_summary.csv").read_text().splitlines()
    assert lines[0] == "metric,mean,std"
    assert any(line.startswith("total_energy_j,") for line in lines)
