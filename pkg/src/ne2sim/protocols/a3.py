"""A3: tree-growing backbone selection from the sink."""

from __future__ import annotations

import logging
from collections import deque

from ..core import RadioParams, Topology
from .base import Channel, ProtocolConfig, ProtocolOutcome

log = logging.getLogger(__name__)

SINK = 0


def selection_metric(topology: Topology, child: int, parent: int, weight: float) -> float:
    """Candidate ranking: energy share plus normalized distance to the parent.

    Far candidates rank higher because they reach more new ground.
    """
    node = topology.nodes[child]
    energy_share = node.residual_energy / node.initial_energy
    return weight * energy_share + (1.0 - weight) * topology.distance(child, parent) / topology.comm_radius


def run_a3(topology: Topology, config: ProtocolConfig, params: RadioParams) -> ProtocolOutcome:
    adj = topology.adjacency
    channel = Channel(topology, params, config.reception_charging)

    heads = {SINK}
    attached = {SINK}
    dominated = {SINK} | set(adj[SINK])
    tree_edges = []
    active = deque([SINK])

    while active:
        parent = active.popleft()
        channel.broadcast(parent)  # hello

        candidates = sorted(v for v in adj[parent] if v not in attached)
        if not candidates:
            continue
        scores = {}
        for v in candidates:
            scores[v] = selection_metric(topology, v, parent, config.a3_energy_weight)
            channel.unicast(v, parent)  # parent recognition
            attached.add(v)

        ranked = sorted(candidates, key=lambda v: (-scores[v], v))
        channel.broadcast(parent)  # children announcement

        for v in ranked:
            if adj[v] <= dominated:
                channel.broadcast(parent)  # sleep
            else:
                heads.add(v)
                tree_edges.append((parent, v))
                dominated |= adj[v]
                active.append(v)

    partial = len(attached) < len(topology)
    if partial:
        log.warning("A3: %d node(s) unreachable from the sink left as normal", len(topology) - len(attached))
    return channel.finish(heads, tree_edges, partial=partial)
