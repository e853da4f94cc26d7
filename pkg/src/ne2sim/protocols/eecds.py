"""EECDS: weighted maximal-independent-set election plus gray connectors."""

from __future__ import annotations

from ..core import RadioParams, Topology
from .base import Channel, ProtocolConfig, ProtocolOutcome, induced_edges

WHITE, GRAY, BLACK = "white", "gray", "black"


def _components(adj, members: set[int]) -> dict[int, int]:
    """Label of the induced component for each member (smallest id in it)."""
    label = {}
    for s in sorted(members):
        if s in label:
            continue
        label[s] = s
        stack = [s]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v in members and v not in label:
                    label[v] = s
                    stack.append(v)
    return label


def _weight(topology: Topology, u: int):
    # more residual energy wins, then the lower id
    return (topology.nodes[u].residual_energy, -u)


def elect_black(topology: Topology, channel: Channel) -> set[int]:
    """Phase 1: maximal independent set by weight competition, node 0 initiating."""
    n = len(topology)
    adj = topology.adjacency
    color = [WHITE] * n
    competing = set()

    def weight(u):
        return _weight(topology, u)

    def turn_black(u):
        color[u] = BLACK
        channel.broadcast(u)
        for v in sorted(adj[u]):
            if color[v] == WHITE:
                color[v] = GRAY
                channel.broadcast(v)

    turn_black(0)
    while WHITE in color:
        frontier = sorted(u for u in range(n) if color[u] == WHITE and any(color[v] == GRAY for v in adj[u]))
        if not frontier:
            # an untouched component: its heaviest node initiates
            turn_black(max((u for u in range(n) if color[u] == WHITE), key=weight))
            continue
        for u in frontier:
            if u not in competing:
                competing.add(u)
                channel.broadcast(u)  # competition: advertise weight
        contenders = set(frontier)
        winners = [u for u in frontier if all(weight(u) > weight(v) for v in adj[u] if v in contenders)]
        for u in winners:
            turn_black(u)
    return {u for u in range(n) if color[u] == BLACK}


def connect_black(topology: Topology, channel: Channel, black: set[int]) -> set[int]:
    """Phase 2: promote gray connectors until heads are connected per component."""
    n = len(topology)
    adj = topology.adjacency
    heads = set(black)
    target = len(topology.components())

    def weight(u):
        return _weight(topology, u)

    while True:
        label = _components(adj, heads)
        if len(set(label.values())) <= target:
            return heads
        grays = [u for u in range(n) if u not in heads]
        reach = {u: {label[v] for v in adj[u] if v in heads} for u in grays}
        best = max(grays, key=lambda u: (len(reach[u]), weight(u)))
        if len(reach[best]) < 2:
            # black components three hops apart: step toward a foreign one
            bridging = [
                u for u in grays if reach[u]
                and any(reach[v] - reach[u] for v in adj[u] if v not in heads)
            ]
            best = max(bridging, key=weight)
        heads.add(best)
        channel.broadcast(best)  # connector declaration


def run_eecds(topology: Topology, config: ProtocolConfig, params: RadioParams) -> ProtocolOutcome:
    channel = Channel(topology, params, config.reception_charging)
    heads = connect_black(topology, channel, elect_black(topology, channel))
    return channel.finish(heads, induced_edges(topology, heads))
