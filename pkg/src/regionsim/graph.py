"""Communication digraph: construction from node positions and distance queries.

Vertices are plain node ids (ints or strings, one type per graph).  Graphs are
immutable after construction, so concurrent read-only queries are safe.
Unreachable is always reported as ``None``, never a sentinel number.
"""

import heapq
import math
import random
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping

NodeId = int | str

# weight override for shortest_path: (tail, head, arc_weight) -> cost
WeightFn = Callable[[NodeId, NodeId, float], float]


@dataclass(frozen=True)
class NodePos:
    """A deployed node: planar position in meters plus its radio reach."""

    id: NodeId
    x: float
    y: float
    radio_range: float
    is_boundary_node: bool = False
    region_id: int | None = None

    def __post_init__(self):
        if self.radio_range <= 0:
            raise ValueError(f"node {self.id!r}: radio_range must be > 0")

    def distance_to(self, other: "NodePos") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class PathResult:
    """A directed walk with its total weight and arc count.

    Boundary walks may revisit vertices; ``vertices`` is the full sequence.
    """

    vertices: tuple[NodeId, ...]
    length: float
    hops: int


class Digraph:
    """Weighted digraph with positive arc weights and no self-loops."""

    def __init__(self, vertices: Iterable[NodeId], arcs: Mapping[tuple[NodeId, NodeId], float]):
        self._vertices = tuple(sorted(set(vertices)))
        vset = set(self._vertices)
        self._out: dict[NodeId, dict[NodeId, float]] = {v: {} for v in self._vertices}
        self._in: dict[NodeId, dict[NodeId, float]] = {v: {} for v in self._vertices}
        for (u, v) in sorted(arcs):
            w = float(arcs[(u, v)])
            if u not in vset or v not in vset:
                raise ValueError(f"arc ({u!r}, {v!r}) references unknown vertex")
            if u == v:
                raise ValueError(f"self-loop on {u!r} not allowed")
            if w <= 0:
                raise ValueError(f"arc ({u!r}, {v!r}) has non-positive weight {w}")
            self._out[u][v] = w
            self._in[v][u] = w

    @property
    def vertices(self) -> tuple[NodeId, ...]:
        return self._vertices

    def __contains__(self, v: NodeId) -> bool:
        return v in self._out

    def __len__(self) -> int:
        return len(self._vertices)

    def _require(self, v: NodeId) -> None:
        if v not in self._out:
            raise ValueError(f"unknown vertex {v!r}")

    def arcs(self) -> Iterator[tuple[NodeId, NodeId, float]]:
        for u in self._vertices:
            for v, w in self._out[u].items():
                yield u, v, w

    @property
    def arc_count(self) -> int:
        return sum(len(nbrs) for nbrs in self._out.values())

    def has_arc(self, u: NodeId, v: NodeId) -> bool:
        return u in self._out and v in self._out[u]

    def weight(self, u: NodeId, v: NodeId) -> float:
        self._require(u)
        if v not in self._out[u]:
            raise ValueError(f"no arc ({u!r}, {v!r})")
        return self._out[u][v]

    def out_neighbors(self, v: NodeId) -> tuple[NodeId, ...]:
        self._require(v)
        return tuple(self._out[v])

    def in_neighbors(self, v: NodeId) -> tuple[NodeId, ...]:
        self._require(v)
        return tuple(self._in[v])


@dataclass(frozen=True)
class Neighborhood:
    """1-hop in/out neighbor sets of a vertex with their degrees."""

    in_nodes: frozenset
    out_nodes: frozenset

    @property
    def all_nodes(self) -> frozenset:
        return self.in_nodes | self.out_nodes

    @property
    def in_degree(self) -> int:
        return len(self.in_nodes)

    @property
    def out_degree(self) -> int:
        return len(self.out_nodes)


def neighborhoods(g: Digraph, v: NodeId) -> Neighborhood:
    """Incoming, outgoing and combined 1-hop neighbor sets of ``v``."""
    g._require(v)
    return Neighborhood(frozenset(g.in_neighbors(v)), frozenset(g.out_neighbors(v)))


def build_unit_disk_digraph(
    nodes: Iterable[NodePos], symmetric: bool = True, unit_weight: bool = False
) -> Digraph:
    """Build the communication digraph from positions and radio ranges.

    An arc (u, v) exists iff v lies within u's radio range; with ``symmetric``
    both ranges must cover the distance, so arcs come in pairs.  Weights are
    euclidean meters, or exactly 1 with ``unit_weight``.
    """
    node_list = list(nodes)
    if not node_list:
        raise ValueError("empty node list")
    seen: set[NodeId] = set()
    for n in node_list:
        if n.id in seen:
            raise ValueError(f"duplicate node id {n.id!r}")
        seen.add(n.id)
    arcs: dict[tuple[NodeId, NodeId], float] = {}
    for a in node_list:
        for b in node_list:
            if a.id == b.id:
                continue
            d = a.distance_to(b)
            reach = min(a.radio_range, b.radio_range) if symmetric else a.radio_range
            if d <= reach:
                if d == 0.0 and not unit_weight:
                    raise ValueError(f"nodes {a.id!r} and {b.id!r} are coincident")
                arcs[(a.id, b.id)] = 1.0 if unit_weight else d
    return Digraph((n.id for n in node_list), arcs)


def perturb_weights(g: Digraph, seed: int, scale: float = 1e-9) -> Digraph:
    """Copy of ``g`` with a seeded positive epsilon added to every arc weight.

    Makes shortest paths unique with probability one while moving every
    length by less than ``scale`` per arc.
    """
    if scale <= 0:
        raise ValueError("scale must be > 0")
    rng = random.Random(seed)
    arcs = {}
    for u, v, w in g.arcs():
        arcs[(u, v)] = w + rng.random() * scale
    return Digraph(g.vertices, arcs)


def hop_distance(g: Digraph, u: NodeId, v: NodeId) -> int | None:
    """Minimum number of arcs on any directed u->v path; None if unreachable."""
    g._require(u)
    g._require(v)
    if u == v:
        return 0
    dist = {u: 0}
    queue = deque([u])
    while queue:
        x = queue.popleft()
        for y in g.out_neighbors(x):
            if y not in dist:
                dist[y] = dist[x] + 1
                if y == v:
                    return dist[y]
                queue.append(y)
    return None


def shortest_path(
    g: Digraph,
    x: NodeId,
    y: NodeId,
    weight_fn: WeightFn | None = None,
    unit: bool = False,
) -> PathResult | None:
    """Minimum-weight x->y path, or None when unreachable.

    Ties are broken deterministically in favor of the lexicographically
    smallest vertex-id sequence.  ``unit`` prices every arc at 1 (hop metric);
    ``weight_fn`` substitutes an arbitrary positive per-arc cost.
    """
    g._require(x)
    g._require(y)
    if x == y:
        return PathResult((x,), 0.0, 0)
    # Heap entries carry the whole candidate path so that equal-length paths
    # pop in lexicographic order.
    heap: list[tuple[float, tuple[NodeId, ...]]] = [(0.0, (x,))]
    settled: set[NodeId] = set()
    while heap:
        d, path = heapq.heappop(heap)
        v = path[-1]
        if v in settled:
            continue
        settled.add(v)
        if v == y:
            return PathResult(path, d, len(path) - 1)
        for nb in g.out_neighbors(v):
            if nb in settled:
                continue
            w = g.weight(v, nb)
            if unit:
                cost = 1.0
            elif weight_fn is not None:
                cost = weight_fn(v, nb, w)
            else:
                cost = w
            if cost < 0:
                raise ValueError(f"negative cost on arc ({v!r}, {nb!r})")
            heapq.heappush(heap, (d + cost, path + (nb,)))
    return None


def single_source_distances(
    g: Digraph,
    source: NodeId,
    unit: bool = False,
    reverse: bool = False,
) -> dict[NodeId, float]:
    """Distances from ``source`` to every reachable vertex.

    With ``reverse`` the arcs are followed backwards, giving the distance
    *to* ``source`` from every vertex.  Missing keys mean unreachable.
    """
    g._require(source)
    nbrs = g.in_neighbors if reverse else g.out_neighbors
    wt = (lambda a, b: g.weight(b, a)) if reverse else g.weight
    dist: dict[NodeId, float] = {source: 0.0}
    heap: list[tuple[float, NodeId]] = [(0.0, source)]
    while heap:
        d, v = heapq.heappop(heap)
        if d > dist.get(v, math.inf):
            continue
        for nb in nbrs(v):
            cost = 1.0 if unit else wt(v, nb)
            nd = d + cost
            if nd < dist.get(nb, math.inf):
                dist[nb] = nd
                heapq.heappush(heap, (nd, nb))
    return dist


def set_distance(
    g: Digraph,
    x: NodeId | Iterable[NodeId],
    target_set: Iterable[NodeId],
) -> float | None:
    """Shortest distance from a node (or node set) to the nearest target.

    Point-to-set takes the min over targets; set-to-set additionally takes
    the min over sources.  None when no target is reachable.
    """
    targets = sorted(set(target_set))
    if not targets:
        raise ValueError("empty target set")
    for t in targets:
        g._require(t)
    sources = [x] if isinstance(x, (int, str)) else sorted(set(x))
    if not sources:
        raise ValueError("empty source set")
    target_lookup = set(targets)
    best: float | None = None
    for s in sources:
        g._require(s)
        if s in target_lookup:
            return 0.0
        dist = single_source_distances(g, s)
        for t in targets:
            d = dist.get(t)
            if d is not None and (best is None or d < best):
                best = d
    return best


def is_connected(g: Digraph) -> bool:
    """True when every vertex is reachable from the smallest-id vertex.

    For symmetric graphs this is ordinary connectivity.
    """
    if len(g) == 0:
        return False
    start = g.vertices[0]
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for nb in g.out_neighbors(v):
            if nb not in seen:
                seen.add(nb)
                queue.append(nb)
    return len(seen) == len(g)


def random_connected_unit_disk(
    n: int,
    seed: int | random.Random,
    side: float = 100.0,
    radio_range: float = 40.0,
    unit_weight: bool = False,
    max_attempts: int = 200,
) -> tuple[list[NodePos], Digraph]:
    """Random connected symmetric unit-disk graph on ``n`` nodes.

    Positions are redrawn until the graph connects; after ``max_attempts``
    failures the range is widened by 25% and the attempt budget restarts.
    """
    if n < 1:
        raise ValueError("need at least one node")
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    reach = radio_range
    while True:
        for _ in range(max_attempts):
            nodes = [
                NodePos(i, rng.uniform(0, side), rng.uniform(0, side), reach)
                for i in range(n)
            ]
            g = build_unit_disk_digraph(nodes, symmetric=True, unit_weight=unit_weight)
            if is_connected(g):
                return nodes, g
        reach *= 1.25
