"""Deterministic discrete-event runs, batch averaging, and output files.

One run = deploy nodes, build the communication graph, set up the selected
protocol, then drive packet generation / battery deaths / interval reports
through a single event loop.  Identical (config, seed) pairs produce
identical reports and byte-identical CSV files.

Model notes:
  * The sink is a mains-powered base station: it relays and receives but has
    no ledger entry and never dies.
  * Packet hop charges are applied at the generation timestamp; transmission
    time enters the energy figures, not the event clock.
  * Under the region-search protocol only nodes on an active session route
    stay in sense mode after setup; the comparison protocols keep every
    sensor in sense mode, which is the energy gap being measured.
  * Battery deaths from impulse charges are exact; deaths from continuous
    drain are resolved by self-rescheduling death events (within float
    accuracy of the projected crossing).
"""

import csv
import heapq
import random
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .energy import EnergyLedger, rx_energy, tx_energy
from .flood import cells_from_flood, message_savings, naive_flood_count, run_flood
from .graph import NodeId, build_unit_disk_digraph, neighborhoods
from .regions import build_boundary_dual_graph
from .routing import (
    RouteNotFound,
    build_res_tables,
    characteristic_distance,
    route,
)
from .scenario import ScenarioConfig, ScenarioError, deploy, scenario_to_dict

COVERAGE_SAMPLES = 10_000


class SimulationError(RuntimeError):
    """A run aborted; the message carries the failing seed."""


class EventKind(Enum):
    PACKET_GEN = "packet_gen"
    TX = "tx"
    RX = "rx"
    SLEEP = "sleep"
    WAKE = "wake"
    REPORT = "report"
    NODE_DEATH = "node_death"


_PRIORITY = {
    EventKind.NODE_DEATH: 0,
    EventKind.WAKE: 1,
    EventKind.SLEEP: 1,
    EventKind.PACKET_GEN: 2,
    EventKind.TX: 3,
    EventKind.RX: 4,
    EventKind.REPORT: 5,
}


@dataclass(frozen=True)
class Event:
    """A timestamped simulation event; ties order by kind priority then node."""

    time: float
    kind: EventKind
    node: NodeId | None = None
    payload: object = None


@dataclass(frozen=True)
class IntervalRow:
    t_s: float
    coverage_pct: float
    alive: int
    generated: int
    delivered: int
    delivery_ratio: float
    tx_j: float
    rx_j: float
    sense_j: float
    sleep_j: float
    total_j: float


@dataclass
class SessionRecord:
    session_id: int
    source: NodeId
    sink: NodeId
    protocol: str
    status: str  # "ok" or "no_route"
    hops: int
    packet_energy_j: float
    generated: int = 0
    delivered: int = 0
    energy_j: float = 0.0
    vertices: tuple = ()


@dataclass(frozen=True)
class FloodStats:
    tx: int
    rx: int
    discard: int
    naive: int
    savings: float
    rounds: int
    unreached: int


@dataclass
class RunReport:
    protocol: str
    seed: int
    config: dict
    intervals: list[IntervalRow]
    sessions: list[SessionRecord]
    flood: FloodStats | None
    flood_trace_rows: list
    totals_by_mode: dict[str, float]
    total_energy_j: float
    lifetime_s: float
    deaths: list[tuple[float, NodeId]]
    generated: int
    delivered: int
    delivery_ratio: float
    ledger_snapshots: list[tuple[float, list]]
    d_char_m: float | None
    sessions_requested: int
    sessions_established: int


@dataclass
class BatchReport:
    protocol: str
    base_seed: int
    seeds: tuple[int, ...]
    config: dict
    runs: list[RunReport]
    metrics: dict[str, tuple[float, float]]  # metric -> (mean, std)


class _Session:
    __slots__ = ("record", "hops")

    def __init__(self, record: SessionRecord, hops: list):
        self.record = record
        self.hops = hops  # (sender, receiver, tx_j, rx_j) per hop


class _Run:
    """Single-run engine; builds everything in __init__ and leaves a report."""

    def __init__(self, config: ScenarioConfig, seed: int):
        self.config = config
        self.seed = seed
        self.params = config.energy
        self.alpha = config.path_loss_exponent
        self.bits = float(config.packet_bits)
        self.duration = config.sim_duration_s

        self.deployment = deploy(config, seed)
        self.sink = self.deployment.sink_id
        self.nodes = self.deployment.nodes
        self.sensors = self.deployment.sensor_ids
        self.g = build_unit_disk_digraph(
            [self.nodes[v] for v in sorted(self.nodes)], symmetric=True
        )
        self.ledger = EnergyLedger(self.sensors, config.battery_j)

        self.mode: dict[NodeId, str] = {}
        self.mode_since: dict[NodeId, float] = {}
        self.alive: set[NodeId] = set(self.sensors)
        self.deaths: list[tuple[float, NodeId]] = []
        self._death_sched: dict[NodeId, float] = {}

        self.heap: list = []
        self._seq = 0
        self.now = 0.0
        self.generated = 0
        self.delivered = 0
        self.intervals: list[IntervalRow] = []
        self.ledger_snapshots: list[tuple[float, list]] = []

        self._coverage_points = self._draw_coverage_points()
        self._setup_protocol()
        self._setup_sessions()
        self._setup_schedule()
        self._loop()
        self.report = self._build_report()

    # -- setup -----------------------------------------------------------

    def _draw_coverage_points(self) -> np.ndarray:
        rng = np.random.default_rng([abs(self.seed), 0x5EED])
        pts = rng.random((COVERAGE_SAMPLES, 2))
        pts[:, 0] *= self.config.area_width
        pts[:, 1] *= self.config.area_height
        return pts

    def _setup_protocol(self):
        sink_nb = neighborhoods(self.g, self.sink).all_nodes
        self.init_active = frozenset(v for v in sink_nb if v != self.sink)
        self.tables = None
        self.flood_stats: FloodStats | None = None
        self.flood_trace_rows: list = []
        self.d_char: float | None = None
        self._flood_charges: list[tuple[NodeId, float, float]] = []
        self._flood_pending = False

        if self.config.protocol == "res":
            trace: list | None = [] if self.config.flood_trace else None
            result = run_flood(self.g, self.deployment.seeds, trace=trace)
            self.flood_trace_rows = trace or []
            naive = naive_flood_count(self.g, self.deployment.seeds)
            self.flood_stats = FloodStats(
                tx=result.totals.tx,
                rx=result.totals.rx,
                discard=result.totals.discard,
                naive=naive,
                savings=message_savings(result.totals, self.g, self.deployment.seeds),
                rounds=result.rounds,
                unreached=len(result.unreached),
            )
            cells = cells_from_flood(self.g, self.deployment.seeds, result.states)
            dual = build_boundary_dual_graph(self.g, cells)
            self.tables = build_res_tables(self.g, cells, dual, self.sink)
            top = self.params.level_count - 1
            tx1 = tx_energy(self.bits, top, self.params)
            rx1 = rx_energy(self.bits, self.params)
            self._flood_charges = [
                (v, result.states[v].tx_count * tx1, result.states[v].rx_count * rx1)
                for v in self.sensors
            ]
            self._flood_pending = True
        elif self.config.protocol == "merr":
            self.d_char = characteristic_distance(
                self.params, self.config.radio_range, self.alpha
            )

    def _setup_sessions(self):
        rng = random.Random(f"{self.seed}:sources")
        pool = list(self.sensors)
        count = min(self.config.sessions, len(pool))
        sources = rng.sample(pool, count) if count else []
        self.sessions: list[_Session] = []
        for idx, src in enumerate(sources):
            try:
                r = route(
                    self.config.protocol,
                    self.g,
                    self.nodes,
                    src,
                    self.sink,
                    self.params,
                    alpha=self.alpha,
                    tables=self.tables,
                    bits=self.bits,
                )
            except RouteNotFound:
                rec = SessionRecord(
                    idx, src, self.sink, self.config.protocol, "no_route", 0, 0.0
                )
                self.sessions.append(_Session(rec, []))
                continue
            hops = []
            packet_j = 0.0
            for i in range(r.hops):
                snd, rcv = r.vertices[i], r.vertices[i + 1]
                txj = tx_energy(self.bits, r.levels[i], self.params)
                rxj = rx_energy(self.bits, self.params) if rcv != self.sink else 0.0
                hops.append((snd, rcv, txj, rxj))
                packet_j += txj + rxj
            rec = SessionRecord(
                idx,
                src,
                self.sink,
                self.config.protocol,
                "ok",
                r.hops,
                packet_j,
                vertices=r.vertices,
            )
            self.sessions.append(_Session(rec, hops))

        if self.config.protocol == "res":
            duty: set[NodeId] = set()
            for s in self.sessions:
                if s.record.status == "ok":
                    duty.update(s.record.vertices)
            duty.discard(self.sink)
            self.duty = frozenset(duty)
        else:
            self.duty = frozenset(self.sensors)

    def _push(self, ev: Event):
        self._seq += 1
        key = ev.node if isinstance(ev.node, int) else -1
        heapq.heappush(self.heap, (ev.time, _PRIORITY[ev.kind], key, self._seq, ev))

    def _setup_schedule(self):
        for v in self.sensors:
            m = "sense" if v in self.init_active else "sleep"
            self.mode[v] = m
            self.mode_since[v] = 0.0
            self.ledger.note_mode(0.0, v, m)
            self._project_death(v)
        self.intervals.append(self._interval_row(0.0))
        self.ledger_snapshots.append((0.0, self.ledger.snapshot()))

        t_init = self.config.init_phase_s
        for v in self.sensors:
            kind = EventKind.WAKE if v in self.duty else EventKind.SLEEP
            self._push(Event(t_init, kind, node=v))
        for s in self.sessions:
            if s.record.status == "ok":
                self._push(Event(t_init, EventKind.PACKET_GEN, node=s.record.source,
                                 payload=s.record.session_id))
        interval = self.config.report_interval_s
        times = set()
        k = 1
        while k * interval < self.duration - 1e-9:
            times.add(k * interval)
            k += 1
        times.add(self.duration)
        for t in sorted(times):
            self._push(Event(t, EventKind.REPORT))

    # -- accounting ------------------------------------------------------

    def _accrue_to(self, v: NodeId, t: float):
        m = self.mode[v]
        if m == "dead":
            return
        dur = t - self.mode_since[v]
        if dur > 0:
            self.ledger.accrue(v, m, dur, self.params)
            self.mode_since[v] = t

    def _set_mode(self, v: NodeId, t: float, m: str):
        if self.mode[v] == "dead":
            return
        self._accrue_to(v, t)
        if self.mode[v] != m:
            self.mode[v] = m
            self.ledger.note_mode(t, v, m)
            self._project_death(v)

    def _kill(self, v: NodeId, t: float):
        if self.mode[v] == "dead":
            return
        self.mode[v] = "dead"
        self.alive.discard(v)
        self.deaths.append((t, v))
        self.ledger.note_mode(t, v, "dead")

    def _impulse(self, v: NodeId, mode: str, joules: float, rec: SessionRecord):
        self._accrue_to(v, self.now)
        self.ledger.charge(v, mode, joules)
        rec.energy_j += joules
        if not self.ledger.is_alive(v):
            self._kill(v, self.now)
        else:
            self._project_death(v)

    def _project_death(self, v: NodeId):
        m = self.mode[v]
        if m == "dead":
            return
        power_w = (
            self.params.p_sense_mw if m == "sense" else self.params.p_sleep_mw
        ) / 1000.0
        t = self.now + self.ledger.remaining(v) / power_w
        if t > self.duration:
            return
        # re-push only when meaningfully earlier; the event revalidates anyway
        if v not in self._death_sched or t < self._death_sched[v] - 1.0:
            self._death_sched[v] = t
            self._push(Event(max(t, self.now), EventKind.NODE_DEATH, node=v))

    # -- event handlers ----------------------------------------------------

    def _loop(self):
        while self.heap:
            _, _, _, _, ev = heapq.heappop(self.heap)
            self.now = ev.time
            if ev.kind is EventKind.PACKET_GEN:
                self._handle_packet(ev.payload)
            elif ev.kind in (EventKind.WAKE, EventKind.SLEEP):
                self._handle_phase(ev)
            elif ev.kind is EventKind.REPORT:
                self._handle_report()
            elif ev.kind is EventKind.NODE_DEATH:
                self._handle_death(ev.node)

    def _handle_phase(self, ev: Event):
        if self._flood_pending:
            # region flood setup messages are paid at the end of the init phase
            self._flood_pending = False
            dummy = SessionRecord(-1, -1, self.sink, "res", "setup", 0, 0.0)
            for v, txj, rxj in self._flood_charges:
                if self.mode[v] == "dead":
                    continue
                if txj:
                    self._impulse(v, "tx", txj, dummy)
                if rxj and self.mode[v] != "dead":
                    self._impulse(v, "rx", rxj, dummy)
        self._set_mode(
            ev.node, ev.time, "sense" if ev.kind is EventKind.WAKE else "sleep"
        )

    def _handle_packet(self, session_id: int):
        s = self.sessions[session_id]
        rec = s.record
        rec.generated += 1
        self.generated += 1
        ok = True
        for snd, rcv, txj, rxj in s.hops:
            if snd not in self.alive:
                ok = False
                break
            self._impulse(snd, "tx", txj, rec)
            if rcv != self.sink:
                if rcv not in self.alive:
                    ok = False  # transmission wasted on a dead receiver
                    break
                self._impulse(rcv, "rx", rxj, rec)
        if ok:
            rec.delivered += 1
            self.delivered += 1
        nxt = self.now + 1.0 / self.config.packet_rate_hz
        if nxt < self.duration - 1e-9:
            self._push(Event(nxt, EventKind.PACKET_GEN, node=rec.source,
                             payload=session_id))

    def _handle_death(self, v: NodeId):
        if self.mode[v] == "dead":
            return
        self._accrue_to(v, self.now)
        if not self.ledger.is_alive(v):
            self._kill(v, self.now)
        else:
            self._death_sched.pop(v, None)
            self._project_death(v)

    def _handle_report(self):
        for v in self.alive:
            self._accrue_to(v, self.now)
        self.intervals.append(self._interval_row(self.now))
        self.ledger_snapshots.append((self.now, self.ledger.snapshot()))

    # -- metrics ---------------------------------------------------------

    def _coverage_pct(self) -> float:
        if not self.alive:
            return 0.0
        ids = sorted(self.alive)
        xs = np.array([self.nodes[v].x for v in ids])
        ys = np.array([self.nodes[v].y for v in ids])
        pts = self._coverage_points
        r2 = self.config.sensing_range**2
        covered = np.zeros(len(pts), dtype=bool)
        for i in range(0, len(xs), 64):  # bound the broadcast block size
            dx = pts[:, 0, None] - xs[None, i : i + 64]
            dy = pts[:, 1, None] - ys[None, i : i + 64]
            covered |= ((dx * dx + dy * dy) <= r2).any(axis=1)
            if covered.all():
                break
        return 100.0 * float(covered.mean())

    def _interval_row(self, t: float) -> IntervalRow:
        by_mode = {m: 0.0 for m in ("tx", "rx", "sense", "sleep")}
        total = 0.0
        for v in self.sensors:
            spent = self.ledger.spent_by_mode(v)
            for m in by_mode:
                by_mode[m] += spent[m]
            total += self.ledger.total_spent(v)
        ratio = self.delivered / self.generated if self.generated else 0.0
        return IntervalRow(
            t_s=t,
            coverage_pct=self._coverage_pct(),
            alive=len(self.alive),
            generated=self.generated,
            delivered=self.delivered,
            delivery_ratio=ratio,
            tx_j=by_mode["tx"],
            rx_j=by_mode["rx"],
            sense_j=by_mode["sense"],
            sleep_j=by_mode["sleep"],
            total_j=total,
        )

    def _build_report(self) -> RunReport:
        by_mode = {m: 0.0 for m in ("tx", "rx", "sense", "sleep")}
        total = 0.0
        for v in self.sensors:
            spent = self.ledger.spent_by_mode(v)
            for m in by_mode:
                by_mode[m] += spent[m]
            total += self.ledger.total_spent(v)
        lifetime = self.deaths[0][0] if self.deaths else self.duration
        established = sum(1 for s in self.sessions if s.record.status == "ok")
        return RunReport(
            protocol=self.config.protocol,
            seed=self.seed,
            config=scenario_to_dict(self.config),
            intervals=self.intervals,
            sessions=[s.record for s in self.sessions],
            flood=self.flood_stats,
            flood_trace_rows=self.flood_trace_rows,
            totals_by_mode=by_mode,
            total_energy_j=total,
            lifetime_s=lifetime,
            deaths=self.deaths,
            generated=self.generated,
            delivered=self.delivered,
            delivery_ratio=self.delivered / self.generated if self.generated else 0.0,
            ledger_snapshots=self.ledger_snapshots,
            d_char_m=self.d_char,
            sessions_requested=self.config.sessions,
            sessions_established=established,
        )


def run(config: ScenarioConfig, seed: int | None = None) -> RunReport:
    """Execute one deterministic run of the configured scenario."""
    s = config.seed if seed is None else seed
    try:
        return _Run(config, s).report
    except ScenarioError:
        raise
    except Exception as exc:
        raise SimulationError(f"run aborted (seed={s}): {exc}") from exc


def run_batch(config: ScenarioConfig) -> BatchReport:
    """Run the scenario at consecutive seeds and aggregate mean/std metrics."""
    seeds = tuple(config.seed + i for i in range(config.run_count))
    reports = [run(config, s) for s in seeds]
    metrics: dict[str, tuple[float, float]] = {}

    def stat(name, values):
        arr = np.asarray(values, dtype=float)
        metrics[name] = (float(arr.mean()), float(arr.std()))

    stat("total_energy_j", [r.total_energy_j for r in reports])
    for m in ("tx", "rx", "sense", "sleep"):
        stat(f"{m}_j", [r.totals_by_mode[m] for r in reports])
    stat("generated", [r.generated for r in reports])
    stat("delivered", [r.delivered for r in reports])
    stat("delivery_ratio", [r.delivery_ratio for r in reports])
    stat("lifetime_s", [r.lifetime_s for r in reports])
    stat("deaths", [len(r.deaths) for r in reports])
    stat("sessions_established", [r.sessions_established for r in reports])
    stat("coverage_initial_pct", [r.intervals[0].coverage_pct for r in reports])
    stat("coverage_final_pct", [r.intervals[-1].coverage_pct for r in reports])
    stat("coverage_min_pct", [min(i.coverage_pct for i in r.intervals) for r in reports])
    if all(r.flood is not None for r in reports):
        stat("flood_tx", [r.flood.tx for r in reports])
        stat("flood_savings", [r.flood.savings for r in reports])
    return BatchReport(
        protocol=config.protocol,
        base_seed=config.seed,
        seeds=seeds,
        config=scenario_to_dict(config),
        runs=reports,
        metrics=metrics,
    )


def coverage_series(report: RunReport) -> list[tuple[float, float]]:
    """Per-interval (time, coverage %) series of a run."""
    return [(row.t_s, row.coverage_pct) for row in report.intervals]


# -- output files --------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.9f}"


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)


def _report_text(report: RunReport) -> str:
    lines = [
        "run summary",
        f"protocol: {report.protocol}",
        f"seed: {report.seed}",
        f"sensors: {report.config['node_count']}",
        f"sessions: {report.sessions_requested} requested, "
        f"{report.sessions_established} established",
        f"packets: {report.generated} generated, {report.delivered} delivered "
        f"(delivery ratio {report.delivery_ratio:.4f})",
        "energy_j: "
        + " ".join(f"{m}={_fmt(report.totals_by_mode[m])}" for m in ("tx", "rx", "sense", "sleep"))
        + f" total={_fmt(report.total_energy_j)}",
        f"lifetime_s: {report.lifetime_s:.3f}",
        f"deaths: {len(report.deaths)}",
    ]
    cov = [row.coverage_pct for row in report.intervals]
    lines.append(
        f"coverage_pct: initial={cov[0]:.4f} min={min(cov):.4f} final={cov[-1]:.4f}"
    )
    if report.flood is not None:
        f = report.flood
        lines.append(
            f"flood: tx={f.tx} rx={f.rx} discard={f.discard} naive={f.naive} "
            f"suppressed={100.0 * f.savings:.2f}% rounds={f.rounds} unreached={f.unreached}"
        )
    if report.d_char_m is not None:
        lines.append(f"merr_characteristic_distance_m: {report.d_char_m:.6f}")
    lines.append("config:")
    for k, v in report.config.items():
        lines.append(f"  {k} = {v}")
    return "\n".join(lines) + "\n"


def emit_outputs(report: "RunReport | BatchReport", out_dir: str | Path) -> list[Path]:
    """Write the report's CSV and text files; returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    if isinstance(report, BatchReport):
        path = out / "batch_summary.csv"
        rows = [
            [name, _fmt(mean), _fmt(std)]
            for name, (mean, std) in sorted(report.metrics.items())
        ]
        _write_csv(path, ["metric", "mean", "std"], rows)
        written.append(path)
        for r in report.runs:
            written.extend(emit_outputs(r, out / f"run_{r.seed}"))
        return written

    path = out / "summary.csv"
    _write_csv(
        path,
        ["t_s", "coverage_pct", "alive", "generated", "delivered",
         "delivery_ratio", "tx_j", "rx_j", "sense_j", "sleep_j", "total_j"],
        [
            [f"{row.t_s:.3f}", f"{row.coverage_pct:.4f}", row.alive, row.generated,
             row.delivered, f"{row.delivery_ratio:.6f}", _fmt(row.tx_j),
             _fmt(row.rx_j), _fmt(row.sense_j), _fmt(row.sleep_j), _fmt(row.total_j)]
            for row in report.intervals
        ],
    )
    written.append(path)

    path = out / "sessions.csv"
    _write_csv(
        path,
        ["session_id", "source", "sink", "protocol", "status", "hops",
         "packet_energy_j", "generated", "delivered", "energy_j"],
        [
            [s.session_id, s.source, s.sink, s.protocol, s.status, s.hops,
             _fmt(s.packet_energy_j), s.generated, s.delivered, _fmt(s.energy_j)]
            for s in report.sessions
        ],
    )
    written.append(path)

    path = out / "energy.csv"
    rows = []
    for t, snapshot in report.ledger_snapshots:
        for node_id, txj, rxj, sense, sleep, remaining in snapshot:
            rows.append(
                [f"{t:.3f}", node_id, _fmt(txj), _fmt(rxj), _fmt(sense),
                 _fmt(sleep), _fmt(remaining)]
            )
    _write_csv(
        path,
        ["t_s", "node_id", "tx_j", "rx_j", "sense_j", "sleep_j", "remaining_j"],
        rows,
    )
    written.append(path)

    if report.flood_trace_rows:
        path = out / "flood_trace.csv"
        _write_csv(
            path,
            ["round", "sender", "receiver", "region", "hop", "action"],
            [list(r) for r in report.flood_trace_rows],
        )
        written.append(path)

    path = out / "report.txt"
    path.write_text(_report_text(report))
    written.append(path)
    return written
