"""Session routing: the region-search protocol plus four comparison baselines.

All protocols route on the same digraph and energy model:

  res  - table walk: inside a cell, follow the shortest-path tree to the
         cell's exit arc (chosen on the boundary dual graph toward the sink's
         cell); in the sink's cell, follow the tree to the sink.
  dt   - one direct transmission to the sink at the lowest covering level.
  mte  - multi-hop path minimizing the sum of hop distances^alpha.
  merr - greedy relay toward the sink through hops closest to the
         characteristic distance of the radio.
  or   - offline optimum of total per-packet energy; lower-bound baseline.
"""

import heapq
from dataclasses import dataclass
from typing import Mapping

from .energy import EnergyParams, rx_energy, tx_energy
from .graph import Digraph, NodeId, NodePos, shortest_path, single_source_distances
from .regions import BoundaryCellMap, BoundaryDualGraph, DualArc

PROTOCOLS = ("res", "dt", "mte", "merr", "or")


class RoutingError(RuntimeError):
    pass


class RouteNotFound(RoutingError):
    """No feasible route for the protocol; the session is excluded."""


class CycleError(RoutingError):
    """A table walk revisited a node: the tables are corrupt."""


@dataclass(frozen=True)
class SessionRoute:
    """One session's path with the transmit level used on each hop."""

    protocol: str
    source: NodeId
    sink: NodeId
    vertices: tuple[NodeId, ...]
    levels: tuple[int, ...]

    @property
    def hops(self) -> int:
        return len(self.vertices) - 1


def level_range(
    params: EnergyParams, level: int, radio_range: float, alpha: float
) -> float:
    """Reach of a power level, scaling the max range by radiated power^(1/alpha)."""
    top = params.level_mw(params.level_count - 1)
    return radio_range * (params.level_mw(level) / top) ** (1.0 / alpha)


def min_level_for_distance(
    params: EnergyParams, distance: float, radio_range: float, alpha: float
) -> int | None:
    """Lowest level whose reach covers the distance; None if out of max range."""
    for level in range(params.level_count):
        if level_range(params, level, radio_range, alpha) >= distance - 1e-9:
            return level
    return None


def characteristic_distance(
    params: EnergyParams, radio_range: float, alpha: float
) -> float:
    """Hop length minimizing energy per meter relayed.

    Evaluated at each level's maximum reach (within a level the draw is flat,
    so cost per meter is lowest at full reach).
    """
    best_r, best_cost = None, None
    for level in range(params.level_count):
        r = level_range(params, level, radio_range, alpha)
        cost = (params.draw_mw(level) + params.p_rx_mw) / r
        if best_cost is None or cost < best_cost:
            best_cost, best_r = cost, r
    return best_r


@dataclass(frozen=True)
class RoutingTable:
    """Per-node next hop toward a fixed sink; stranded nodes have no entry."""

    sink: NodeId
    next_hop: dict[NodeId, NodeId]
    stranded: tuple[NodeId, ...]


def _tree_next_hops(
    g: Digraph, members: tuple[NodeId, ...], target: NodeId
) -> dict[NodeId, NodeId]:
    """Next hop along the lexicographic shortest-path tree toward ``target``,
    restricted to the subgraph induced by ``members``."""
    mset = set(members)
    arcs = {(u, v): w for u, v, w in g.arcs() if u in mset and v in mset}
    sub = Digraph(members, arcs)
    dist = single_source_distances(sub, target, reverse=True)
    hops: dict[NodeId, NodeId] = {}
    for v in members:
        if v == target or v not in dist:
            continue
        best = None
        for nb in sub.out_neighbors(v):
            d = dist.get(nb)
            if d is None:
                continue
            if abs(d + sub.weight(v, nb) - dist[v]) <= 1e-12 and (best is None or nb < best):
                best = nb
        if best is not None:
            hops[v] = best
    return hops


def build_res_tables(
    g: Digraph, cells: BoundaryCellMap, dual: BoundaryDualGraph, sink: NodeId
) -> RoutingTable:
    """Region-search next-hop tables toward the sink.

    Each non-sink cell forwards along its intra-cell tree to the tail of the
    crossing arc its dual route chose, then across; the sink's cell forwards
    straight to the sink.  Nodes that cannot reach their cell's exit (or whose
    cell has no dual route) are reported stranded.
    """
    if sink not in cells.cell_of:
        raise ValueError(f"sink {sink!r} has no cell assignment")
    sink_cell = cells.cell_of[sink]

    # shortest dual route from every cell toward the sink cell: Dijkstra over
    # reversed dual arcs with lexicographic tie-break on the cell sequence
    incoming: dict[NodeId, list[DualArc]] = {c: [] for c in dual.cells}
    for (_, d), arc in sorted(dual.arcs.items()):
        incoming[d].append(arc)
    exit_arc: dict[NodeId, DualArc] = {}
    dist: dict[NodeId, float] = {}
    heap: list[tuple[float, tuple[NodeId, ...], DualArc | None]] = [
        (0.0, (sink_cell,), None)
    ]
    while heap:
        d, cellpath, first = heapq.heappop(heap)
        c = cellpath[-1]
        if c in dist:
            continue
        dist[c] = d
        if first is not None:
            exit_arc[c] = first
        for arc in incoming[c]:
            if arc.src not in dist:
                heapq.heappush(heap, (d + arc.weight, cellpath + (arc.src,), arc))

    next_hop: dict[NodeId, NodeId] = {}
    stranded: list[NodeId] = []
    for cell in cells.seeds:
        members = cells.canonical_members(cell)
        if not members:
            continue
        if cell == sink_cell:
            tree = _tree_next_hops(g, members, sink)
            for v in members:
                if v == sink:
                    continue
                if v in tree:
                    next_hop[v] = tree[v]
                else:
                    stranded.append(v)
            continue
        arc = exit_arc.get(cell)
        if arc is None:
            stranded.extend(members)
            continue
        tail, head = arc.crossing
        tree = _tree_next_hops(g, members, tail)
        for v in members:
            if v == tail:
                next_hop[v] = head
            elif v in tree:
                next_hop[v] = tree[v]
            else:
                stranded.append(v)
    return RoutingTable(sink=sink, next_hop=next_hop, stranded=tuple(sorted(stranded)))


def walk_table(
    tables: RoutingTable, source: NodeId, sink: NodeId, max_hops: int | None = None
) -> tuple[NodeId, ...]:
    """Follow next-hop entries from source to sink; raise on any loop."""
    if sink != tables.sink:
        raise ValueError(f"tables were built for sink {tables.sink!r}")
    if source == sink:
        raise ValueError("source equals sink")
    verts = [source]
    visited = {source}
    at = source
    while at != sink:
        nxt = tables.next_hop.get(at)
        if nxt is None:
            raise RouteNotFound(f"res: no route from {source!r} (stuck at {at!r})")
        if nxt in visited:
            raise CycleError(f"routing table cycle at {nxt!r} walking from {source!r}")
        if max_hops is not None and len(verts) > max_hops:
            raise CycleError(f"walk from {source!r} exceeded {max_hops} hops")
        verts.append(nxt)
        visited.add(nxt)
        at = nxt
    return tuple(verts)


def _assign_levels(
    vertices: tuple[NodeId, ...],
    nodes: Mapping[NodeId, NodePos],
    params: EnergyParams,
    alpha: float,
    protocol: str,
) -> tuple[int, ...]:
    levels = []
    for u, v in zip(vertices, vertices[1:]):
        d = nodes[u].distance_to(nodes[v])
        lvl = min_level_for_distance(params, d, nodes[u].radio_range, alpha)
        if lvl is None:
            raise RouteNotFound(f"{protocol}: hop {u!r}->{v!r} exceeds max range")
        levels.append(lvl)
    return tuple(levels)


def route(
    protocol: str,
    g: Digraph,
    nodes: Mapping[NodeId, NodePos],
    source: NodeId,
    sink: NodeId,
    params: EnergyParams,
    alpha: float = 2.0,
    tables: RoutingTable | None = None,
    bits: float = 1024.0,
) -> SessionRoute:
    """Route one session under the named protocol; raises RouteNotFound."""
    if protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}")
    if source == sink:
        raise ValueError("source equals sink")
    g._require(source)
    g._require(sink)

    if protocol == "res":
        if tables is None:
            raise ValueError("res routing needs prebuilt tables")
        verts = walk_table(tables, source, sink, max_hops=len(g))
    elif protocol == "dt":
        d = nodes[source].distance_to(nodes[sink])
        if min_level_for_distance(params, d, nodes[source].radio_range, alpha) is None:
            raise RouteNotFound(f"dt: sink beyond max range of {source!r}")
        verts = (source, sink)
    elif protocol == "mte":
        path = shortest_path(g, source, sink, weight_fn=lambda u, v, w: w**alpha)
        if path is None:
            raise RouteNotFound(f"mte: {sink!r} unreachable from {source!r}")
        verts = path.vertices
    elif protocol == "or":
        def hop_energy(u, v, w):
            lvl = min_level_for_distance(params, w, nodes[u].radio_range, alpha)
            if lvl is None:
                return float("inf")
            e = tx_energy(bits, lvl, params)
            if v != sink:
                e += rx_energy(bits, params)
            return e

        path = shortest_path(g, source, sink, weight_fn=hop_energy)
        if path is None:
            raise RouteNotFound(f"or: {sink!r} unreachable from {source!r}")
        verts = path.vertices
    else:  # merr
        verts = _merr_walk(g, nodes, source, sink, params, alpha)

    return SessionRoute(
        protocol=protocol,
        source=source,
        sink=sink,
        vertices=verts,
        levels=_assign_levels(verts, nodes, params, alpha, protocol),
    )


def _merr_walk(
    g: Digraph,
    nodes: Mapping[NodeId, NodePos],
    source: NodeId,
    sink: NodeId,
    params: EnergyParams,
    alpha: float,
) -> tuple[NodeId, ...]:
    """Greedy relay: make progress toward the sink through hops nearest the
    characteristic distance; deliver directly once the sink is that close."""
    verts = [source]
    at = source
    while at != sink:
        d_char = characteristic_distance(params, nodes[at].radio_range, alpha)
        to_sink = nodes[at].distance_to(nodes[sink])
        nbrs = g.out_neighbors(at)
        if sink in nbrs and to_sink <= d_char:
            verts.append(sink)
            break
        best = None
        best_key = None
        for nb in nbrs:
            if nodes[nb].distance_to(nodes[sink]) >= to_sink:
                continue  # no progress
            key = (abs(nodes[at].distance_to(nodes[nb]) - d_char), nb)
            if best_key is None or key < best_key:
                best_key, best = key, nb
        if best is None:
            raise RouteNotFound(f"merr: stuck at {at!r} routing to {sink!r}")
        verts.append(best)
        at = best
        if len(verts) > len(g):
            raise CycleError(f"merr walk from {source!r} exceeded {len(g)} hops")
    return tuple(verts)


def per_packet_charges(
    route: SessionRoute, params: EnergyParams, bits: float
) -> tuple[tuple[NodeId, str, float], ...]:
    """Ledger charges for one packet along the route.

    Each hop costs the sender a transmit charge at the hop's level and the
    receiver a receive charge; the sink is mains-powered and is never charged.
    """
    charges: list[tuple[NodeId, str, float]] = []
    for i in range(route.hops):
        sender, receiver = route.vertices[i], route.vertices[i + 1]
        charges.append((sender, "tx", tx_energy(bits, route.levels[i], params)))
        if receiver != route.sink:
            charges.append((receiver, "rx", rx_energy(bits, params)))
    return tuple(charges)


def packet_energy(route: SessionRoute, params: EnergyParams, bits: float) -> float:
    """Total sensor energy one packet costs on this route."""
    return sum(j for _, _, j in per_packet_charges(route, params, bits))
