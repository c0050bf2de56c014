"""Distributed region flooding: seeds label every node with its nearest region(s).

Each seed starts a wavefront carrying (region id, hop counter).  A node keeps
the set of regions seen at its current best hop count and kills anything
arriving late, which is what prunes the flood at cell boundaries.  The
decision rule for an arriving message against local state (regions R, best
distance D) is:

  hop >  D            -> discard
  hop == D, region new-> merge region, rebroadcast with hop+1
  hop == D, region old-> discard
  hop <  D (or unset) -> replace state with this region/hop, rebroadcast
"""

import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from .graph import Digraph, NodeId
from .regions import BoundaryCellMap


class FloodAction(Enum):
    DISCARD = "discard"
    MERGE_REBROADCAST = "merge"
    REPLACE_REBROADCAST = "replace"


@dataclass(frozen=True)
class FloodMessage:
    """Region id plus hop counter; seeds emit hop_value 1."""

    region: NodeId
    hop_value: int

    def __post_init__(self):
        if self.hop_value < 1:
            raise ValueError("hop_value must be >= 1")


@dataclass
class FloodState:
    """Per-node label set and message tallies.

    ``distance`` None means unset (infinity).  Once set it never increases
    under the synchronized schedule.
    """

    regions: set = field(default_factory=set)
    distance: int | None = None
    tx_count: int = 0
    rx_count: int = 0
    discard_count: int = 0


def handle_message(state: FloodState, msg: FloodMessage) -> FloodAction:
    """Apply one arriving message to a node's state; exactly one rule fires."""
    state.rx_count += 1
    if state.distance is not None and msg.hop_value > state.distance:
        state.discard_count += 1
        return FloodAction.DISCARD
    if state.distance is not None and msg.hop_value == state.distance:
        if msg.region in state.regions:
            state.discard_count += 1
            return FloodAction.DISCARD
        state.regions.add(msg.region)
        return FloodAction.MERGE_REBROADCAST
    state.regions = {msg.region}
    state.distance = msg.hop_value
    return FloodAction.REPLACE_REBROADCAST


# pending message: (sender, receiver, region, hop)
PendingMessage = tuple[NodeId, NodeId, NodeId, int]


def init_flood(
    g: Digraph, seeds: Iterable[NodeId]
) -> tuple[dict[NodeId, FloodState], list[PendingMessage]]:
    """Seed states at distance 0 and the simultaneous first wave of messages."""
    seed_tuple = tuple(sorted(set(seeds)))
    if not seed_tuple:
        raise ValueError("seed set is empty")
    for s in seed_tuple:
        if s not in g:
            raise ValueError(f"seed {s!r} is not a vertex")
    states = {v: FloodState() for v in g.vertices}
    pending: list[PendingMessage] = []
    for s in seed_tuple:
        states[s].regions = {s}
        states[s].distance = 0
        for nb in g.out_neighbors(s):
            pending.append((s, nb, s, 1))
        states[s].tx_count += len(g.out_neighbors(s))
    return states, pending


@dataclass(frozen=True)
class FloodTotals:
    tx: int
    rx: int
    discard: int


@dataclass(frozen=True)
class FloodResult:
    states: dict[NodeId, FloodState]
    totals: FloodTotals
    rounds: int
    unreached: tuple[NodeId, ...]


def run_flood(
    g: Digraph,
    seeds: Iterable[NodeId],
    mode: str = "sync",
    seed: int | None = None,
    trace: list | None = None,
) -> FloodResult:
    """Run the flood to quiescence and return final states and totals.

    ``sync`` delivers all messages of one hop value before the next (every
    message travels at the same speed); ``async`` delivers in seeded random
    order and converges to the same labels.  ``trace`` collects rows
    (round, sender, receiver, region, hop, action) when given.
    """
    states, pending = init_flood(g, seeds)

    def deliver(rnd: int, snd: NodeId, rcv: NodeId, region: NodeId, hop: int) -> list[PendingMessage]:
        action = handle_message(states[rcv], FloodMessage(region, hop))
        if trace is not None:
            trace.append((rnd, snd, rcv, region, hop, action.value))
        if action is FloodAction.DISCARD:
            return []
        out = [(rcv, nb, region, hop + 1) for nb in g.out_neighbors(rcv)]
        states[rcv].tx_count += len(out)
        return out

    rounds = 0
    if mode == "sync":
        while pending:
            rounds += 1
            nxt: list[PendingMessage] = []
            for snd, rcv, region, hop in sorted(pending, key=lambda p: (p[1], p[2], p[0])):
                nxt.extend(deliver(rounds, snd, rcv, region, hop))
            pending = nxt
    elif mode == "async":
        if seed is None:
            raise ValueError("async mode needs a seed")
        rng = random.Random(seed)
        queue = list(pending)
        while queue:
            rounds += 1
            i = rng.randrange(len(queue))
            queue[i], queue[-1] = queue[-1], queue[i]
            snd, rcv, region, hop = queue.pop()
            queue.extend(deliver(rounds, snd, rcv, region, hop))
    else:
        raise ValueError(f"unknown mode {mode!r}")

    totals = FloodTotals(
        tx=sum(s.tx_count for s in states.values()),
        rx=sum(s.rx_count for s in states.values()),
        discard=sum(s.discard_count for s in states.values()),
    )
    unreached = tuple(v for v in g.vertices if states[v].distance is None)
    return FloodResult(states, totals, rounds, unreached)


def naive_flood_count(g: Digraph, seeds: Iterable[NodeId]) -> int:
    """Message count of per-seed unrestricted flooding.

    Every node rebroadcasts each seed's flood once, on first receipt, across
    the whole graph; counts are per-link messages.
    """
    seed_tuple = tuple(sorted(set(seeds)))
    if not seed_tuple:
        raise ValueError("seed set is empty")
    total = 0
    for s in seed_tuple:
        reached = {s}
        frontier = [s]
        total += len(g.out_neighbors(s))
        while frontier:
            nxt = []
            for v in frontier:
                for nb in g.out_neighbors(v):
                    if nb not in reached:
                        reached.add(nb)
                        total += len(g.out_neighbors(nb))
                        nxt.append(nb)
            frontier = nxt
    return total


def message_savings(totals: FloodTotals, g: Digraph, seeds: Iterable[NodeId]) -> float:
    """Fraction of naive flood messages suppressed by the boundary pruning."""
    naive = naive_flood_count(g, seeds)
    if naive == 0:
        return 0.0
    return 1.0 - totals.tx / naive


def cells_from_flood(
    g: Digraph, seeds: Iterable[NodeId], states: dict[NodeId, FloodState]
) -> BoundaryCellMap:
    """Boundary cell map read off the flood labels (hop metric).

    Nodes the flood never reached carry no assignment and are absent from the
    map; callers decide whether that is an error.
    """
    seed_tuple = tuple(sorted(set(seeds)))
    owners: dict[NodeId, tuple[NodeId, ...]] = {}
    cell_of: dict[NodeId, NodeId] = {}
    dist: dict[NodeId, float] = {}
    for v in g.vertices:
        st = states[v]
        if st.distance is None:
            continue
        own = tuple(sorted(st.regions))
        owners[v] = own
        cell_of[v] = own[0]
        dist[v] = float(st.distance)
    members = {
        s: frozenset(v for v, own in owners.items() if s in own) for s in seed_tuple
    }
    ties = frozenset(v for v, own in owners.items() if len(own) > 1)
    return BoundaryCellMap(
        seeds=seed_tuple,
        metric="hop",
        owners=owners,
        cell_of=cell_of,
        members=members,
        tie_nodes=ties,
        dist_to_seed=dist,
    )
