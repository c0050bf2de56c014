"""Boundary cells around region seeds, the cell dual graph, and boundary routing.

A boundary cell is the discrete Dirichlet/Voronoi cell of a seed on the
communication graph: every node belongs to the seed(s) it can reach in the
fewest hops (or least weighted distance, when the weighted option is on).
The dual graph has one vertex per cell and carries composed crossing weights,
which bound the stretch of routing through cells.
"""

import heapq
from dataclasses import dataclass
from typing import Iterable

from .graph import Digraph, NodeId, PathResult, shortest_path, single_source_distances


class StretchBoundError(RuntimeError):
    """Boundary route longer than its arc-count bound; cells and path weights disagree."""


def _normalize_seeds(g: Digraph, seeds: Iterable[NodeId]) -> tuple[NodeId, ...]:
    out = tuple(sorted(set(seeds)))
    if not out:
        raise ValueError("seed set is empty")
    for s in out:
        if s not in g:
            raise ValueError(f"seed {s!r} is not a vertex")
    return out


@dataclass(frozen=True)
class BoundaryCellMap:
    """Assignment of every node to its nearest region seed(s).

    ``owners`` keeps all minimizing seeds per node; ``cell_of`` resolves ties
    to the smallest seed id so downstream routing is deterministic.
    """

    seeds: tuple[NodeId, ...]
    metric: str  # "hop" or "weighted"
    owners: dict[NodeId, tuple[NodeId, ...]]
    cell_of: dict[NodeId, NodeId]
    members: dict[NodeId, frozenset]
    tie_nodes: frozenset
    dist_to_seed: dict[NodeId, float]

    def canonical_members(self, seed: NodeId) -> tuple[NodeId, ...]:
        return tuple(v for v in sorted(self.cell_of) if self.cell_of[v] == seed)


def compute_boundary_cells(
    g: Digraph, seeds: Iterable[NodeId], weighted: bool = False
) -> BoundaryCellMap:
    """Assign every node to the seed(s) minimizing its distance-to-seed.

    Default metric is hop count; ``weighted`` switches to arc weights.
    Raises if any node cannot reach a seed.
    """
    seed_tuple = _normalize_seeds(g, seeds)
    # distance from every node TO each seed = reverse search from the seed
    to_seed = {
        s: single_source_distances(g, s, unit=not weighted, reverse=True)
        for s in seed_tuple
    }
    owners: dict[NodeId, tuple[NodeId, ...]] = {}
    cell_of: dict[NodeId, NodeId] = {}
    dist: dict[NodeId, float] = {}
    for v in g.vertices:
        best = None
        mins: list[NodeId] = []
        for s in seed_tuple:
            d = to_seed[s].get(v)
            if d is None:
                continue
            if best is None or d < best:
                best, mins = d, [s]
            elif d == best:
                mins.append(s)
        if best is None:
            raise ValueError(f"node {v!r} cannot reach any seed")
        owners[v] = tuple(mins)
        cell_of[v] = mins[0]  # seeds already sorted
        dist[v] = best
    members = {
        s: frozenset(v for v, own in owners.items() if s in own) for s in seed_tuple
    }
    ties = frozenset(v for v, own in owners.items() if len(own) > 1)
    return BoundaryCellMap(
        seeds=seed_tuple,
        metric="weighted" if weighted else "hop",
        owners=owners,
        cell_of=cell_of,
        members=members,
        tie_nodes=ties,
        dist_to_seed=dist,
    )


@dataclass(frozen=True)
class ContainmentCheck:
    """Result of checking that a node's path to its seed stays in the cell."""

    ok: bool
    node: NodeId
    owner: NodeId
    witness: NodeId | None
    path: PathResult
    ties_on_path: tuple[NodeId, ...]


def verify_cell_containment(g: Digraph, cells: BoundaryCellMap, u: NodeId) -> ContainmentCheck:
    """Check that the canonical shortest path from u to its seed stays in the cell.

    Membership counts tie nodes; ties encountered on the path are reported
    separately, since their canonical owner may differ.
    """
    if u not in cells.cell_of:
        raise ValueError(f"node {u!r} has no cell assignment")
    owner = cells.cell_of[u]
    path = shortest_path(g, u, owner, unit=cells.metric == "hop")
    if path is None:
        raise ValueError(f"node {u!r} cannot reach its seed {owner!r}")
    member = cells.members[owner]
    ties = tuple(v for v in path.vertices if v in cells.tie_nodes)
    for v in path.vertices:
        if v not in member:
            return ContainmentCheck(False, u, owner, v, path, ties)
    return ContainmentCheck(True, u, owner, None, path, ties)


@dataclass(frozen=True)
class DualArc:
    """Directed cell-to-cell arc with composed weight and chosen crossing arc."""

    src: NodeId
    dst: NodeId
    weight: float
    crossing: tuple[NodeId, NodeId]


@dataclass(frozen=True)
class BoundaryDualGraph:
    """One vertex per boundary cell; arcs where communication arcs cross cells."""

    cells: tuple[NodeId, ...]
    arcs: dict[tuple[NodeId, NodeId], DualArc]

    def out_arcs(self, cell: NodeId) -> tuple[DualArc, ...]:
        return tuple(a for (s, _), a in sorted(self.arcs.items()) if s == cell)


def _cell_subgraph_distances(
    g: Digraph, members: tuple[NodeId, ...], anchor: NodeId
) -> tuple[dict[NodeId, float], dict[NodeId, float]]:
    """(from-anchor, to-anchor) weighted distances inside the induced subgraph."""
    mset = set(members)
    arcs = {
        (u, v): w
        for u, v, w in g.arcs()
        if u in mset and v in mset
    }
    sub = Digraph(members, arcs)
    return (
        single_source_distances(sub, anchor),
        single_source_distances(sub, anchor, reverse=True),
    )


def build_boundary_dual_graph(g: Digraph, cells: BoundaryCellMap) -> BoundaryDualGraph:
    """Build the cell dual graph with composed crossing weights.

    The weight of a dual arc is the minimum, over communication arcs (u, v)
    crossing the two cells, of
        d(seed_src -> u) + w(u, v) + d(v -> seed_dst)
    with both d terms measured inside the canonical cell subgraphs.  Crossing
    arcs whose endpoints are unreachable inside their subgraph are skipped.
    Ties pick the lexicographically smallest (u, v) pair.
    """
    from_seed: dict[NodeId, dict[NodeId, float]] = {}
    to_seed: dict[NodeId, dict[NodeId, float]] = {}
    for s in cells.seeds:
        members = cells.canonical_members(s)
        if not members:
            from_seed[s], to_seed[s] = {}, {}
            continue
        from_seed[s], to_seed[s] = _cell_subgraph_distances(g, members, s)
    arcs: dict[tuple[NodeId, NodeId], DualArc] = {}
    for u, v, w in sorted(g.arcs()):
        su = cells.cell_of.get(u)
        sv = cells.cell_of.get(v)
        if su is None or sv is None or su == sv:
            continue
        head = from_seed[su].get(u)
        tail = to_seed[sv].get(v)
        if head is None or tail is None:
            continue
        composed = head + w + tail
        key = (su, sv)
        if key not in arcs or composed < arcs[key].weight:
            arcs[key] = DualArc(su, sv, composed, (u, v))
    return BoundaryDualGraph(cells=cells.seeds, arcs=arcs)


def dual_route(
    dual: BoundaryDualGraph, src_cell: NodeId, dst_cell: NodeId
) -> tuple[DualArc, ...] | None:
    """Shortest dual-graph route between two cells as a sequence of dual arcs.

    Ties break on the lexicographically smallest cell-id sequence.  None if
    the destination cell is unreachable in the dual graph.
    """
    if src_cell not in dual.cells or dst_cell not in dual.cells:
        raise ValueError("unknown cell")
    if src_cell == dst_cell:
        return ()
    out: dict[NodeId, list[DualArc]] = {c: [] for c in dual.cells}
    for (s, _), arc in sorted(dual.arcs.items()):
        out[s].append(arc)
    heap: list[tuple[float, tuple[NodeId, ...], tuple[DualArc, ...]]] = [
        (0.0, (src_cell,), ())
    ]
    settled: set[NodeId] = set()
    while heap:
        d, cellpath, arcs = heapq.heappop(heap)
        c = cellpath[-1]
        if c in settled:
            continue
        settled.add(c)
        if c == dst_cell:
            return arcs
        for arc in out[c]:
            if arc.dst not in settled:
                heapq.heappush(
                    heap, (d + arc.weight, cellpath + (arc.dst,), arcs + (arc,))
                )
    return None


@dataclass(frozen=True)
class BoundaryRouteResult:
    """Direct path, boundary path through cell seeds, and their length ratio."""

    direct: PathResult
    boundary: PathResult
    ratio: float
    bound: int


def _intra_cell_path(
    g: Digraph, cells: BoundaryCellMap, cell: NodeId, frm: NodeId, to: NodeId
) -> PathResult:
    members = cells.canonical_members(cell)
    mset = set(members)
    arcs = {(u, v): w for u, v, w in g.arcs() if u in mset and v in mset}
    sub = Digraph(members, arcs)
    path = shortest_path(sub, frm, to)
    if path is None:
        raise ValueError(f"no intra-cell path {frm!r}->{to!r} in cell {cell!r}")
    return path


def boundary_route(
    g: Digraph,
    cells: BoundaryCellMap,
    dual: BoundaryDualGraph,
    s: NodeId,
    t: NodeId,
) -> BoundaryRouteResult | None:
    """Compare the direct shortest path with the boundary path through seeds.

    Both endpoints must be seeds.  The boundary path enters each traversed
    cell, detours through its seed, and leaves by the dual route's chosen
    crossing arc, so its length equals the dual-graph distance.  The ratio is
    checked against the direct path's arc count; cells must have been computed
    in the same metric as the graph weights for the bound to apply.
    """
    if s not in cells.seeds or t not in cells.seeds:
        raise ValueError("boundary_route endpoints must be seeds")
    direct = shortest_path(g, s, t)
    if direct is None:
        return None
    if s == t:
        return BoundaryRouteResult(direct, direct, 1.0, 0)
    route = dual_route(dual, cells.cell_of[s], cells.cell_of[t])
    if route is None:
        return None
    verts: list[NodeId] = [s]
    length = 0.0
    at = s
    for arc in route:
        leg = _intra_cell_path(g, cells, arc.src, at, arc.crossing[0])
        verts.extend(leg.vertices[1:])
        length += leg.length
        u, v = arc.crossing
        verts.append(v)
        length += g.weight(u, v)
        seed = arc.dst
        leg = _intra_cell_path(g, cells, seed, v, seed)
        verts.extend(leg.vertices[1:])
        length += leg.length
        at = seed
    boundary = PathResult(tuple(verts), length, len(verts) - 1)
    ratio = boundary.length / direct.length
    bound = direct.hops
    if ratio > bound:
        raise StretchBoundError(
            f"boundary route {s!r}->{t!r}: ratio {ratio:.6f} exceeds bound {bound}"
        )
    return BoundaryRouteResult(direct, boundary, ratio, bound)


def worst_case_construction(
    e: int, m: float, eps: float
) -> tuple[Digraph, tuple[NodeId, ...], NodeId, NodeId]:
    """Tightness instance whose boundary-route ratio approaches ``e`` as eps -> 0.

    A direct s->t path of ``e`` arcs (end arcs weigh m, interior arcs eps)
    where every interior node hangs its own seed at distance m - eps, forcing
    the boundary path to detour into each pendant cell.  Requires m > eps > 0.
    Returns (graph, seeds, s, t); use weighted cells on this graph.
    """
    if e < 2:
        raise ValueError("need at least 2 arcs")
    if not (m > eps > 0):
        raise ValueError("require m > eps > 0")
    chain = ["s"] + [f"a{i:02d}" for i in range(1, e)] + ["t"]
    arcs: dict[tuple[NodeId, NodeId], float] = {}

    def link(u, v, w):
        arcs[(u, v)] = w
        arcs[(v, u)] = w

    link(chain[0], chain[1], m)
    for i in range(1, e - 1):
        link(chain[i], chain[i + 1], eps)
    link(chain[e - 1], chain[e], m)
    seeds = ["s", "t"]
    for i in range(1, e):
        pendant = f"b{i:02d}"
        link(chain[i], pendant, m - eps)
        seeds.append(pendant)
    vertices = chain + seeds[2:]
    return Digraph(vertices, arcs), tuple(sorted(seeds)), "s", "t"
