"""Wu-Li marking followed by Rule-K pruning."""

from __future__ import annotations

from typing import Callable

from ..core import RadioParams, Topology
from .base import Channel, ProtocolConfig, ProtocolOutcome, induced_edges, is_connected_subset


def wu_li_marking(topology: Topology) -> set[int]:
    """Nodes having two neighbors that are not adjacent to each other."""
    adj = topology.adjacency
    marked = set()
    for u in range(len(topology)):
        nbrs = sorted(adj[u])
        if any(w not in adj[v] for i, v in enumerate(nbrs) for w in nbrs[i + 1:]):
            marked.add(u)
    return marked


def prunable(topology: Topology, u: int, marked: set[int], outranks: Callable[[int, int], bool], k: int) -> bool:
    """Rule-K test for a marked node ``u``.

    ``u`` may withdraw when its higher-priority marked neighbors are
    connected among themselves and every other neighbor of ``u`` is adjacent
    to at least ``k`` of them.
    """
    adj = topology.adjacency
    cover = {v for v in adj[u] if v in marked and outranks(v, u)}
    if not cover or not is_connected_subset(adj, cover):
        return False
    return all(len(adj[w] & cover) >= k for w in adj[u] if w not in cover)


def rule_k_prune(topology: Topology, marked: set[int], outranks: Callable[[int, int], bool], k: int) -> list[int]:
    """Marked nodes that unmark, in ascending id order.

    Every decision is taken against the original marked set, so the order of
    evaluation does not matter.
    """
    return [u for u in sorted(marked) if prunable(topology, u, marked, outranks, k)]


def run_cds_rule_k(topology: Topology, config: ProtocolConfig, params: RadioParams) -> ProtocolOutcome:
    n = len(topology)
    channel = Channel(topology, params, config.reception_charging)

    # neighbor discovery: hello, then the neighbor list
    for u in range(n):
        channel.broadcast(u)
    for u in range(n):
        channel.broadcast(u)

    nodes = topology.nodes
    residual = [node.residual_energy for node in nodes]

    def priority(u):
        return (-residual[u], u)

    def outranks(v, u):
        return priority(v) < priority(u)

    marked = wu_li_marking(topology)
    withdrawn = rule_k_prune(topology, marked, outranks, config.rule_k)
    for u in withdrawn:
        channel.broadcast(u)
    heads = marked.difference(withdrawn)

    # complete components (incl. isolated nodes) mark nobody; their top node leads
    for comp in topology.components():
        if heads.isdisjoint(comp):
            heads.add(min(comp, key=priority))

    return channel.finish(heads, induced_edges(topology, heads))
