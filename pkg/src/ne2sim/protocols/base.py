from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..core import (
    DomainError,
    RadioParams,
    Role,
    Topology,
    charge_broadcast,
    charge_reception,
    charge_unicast,
)


class ProtocolKind(enum.Enum):
    CDS_RULE_K = "cds-rule-k"
    A3 = "a3"
    EECDS = "eecds"


@dataclass(frozen=True)
class ProtocolConfig:
    kind: ProtocolKind = ProtocolKind.CDS_RULE_K
    rule_k: int = 2
    a3_energy_weight: float = 0.5
    reception_charging: bool = False

    def __post_init__(self):
        if int(self.rule_k) != self.rule_k or self.rule_k < 1:
            raise DomainError(f"rule_k must be an integer >= 1, got {self.rule_k}")
        if not 0.0 <= self.a3_energy_weight <= 1.0:
            raise DomainError(f"a3_energy_weight must lie in [0, 1], got {self.a3_energy_weight}")


@dataclass(frozen=True)
class ProtocolOutcome:
    roles: tuple[Role, ...]
    backbone_edges: frozenset[tuple[int, int]]
    messages_sent: int
    consumed_energy: tuple[float, ...]
    charges: tuple[float, ...] = field(repr=False, default=())
    partial: bool = False

    @property
    def heads(self) -> list[int]:
        return [i for i, r in enumerate(self.roles) if r is Role.CLUSTER_HEAD]


@dataclass(frozen=True)
class CdsCheck:
    dominating: bool
    connected: bool

    def __bool__(self) -> bool:
        return self.dominating and self.connected


class Channel:
    """Message accounting for one protocol run.

    Every transmission goes through here so the outcome can report the
    message count and the list of individual charges.
    """

    def __init__(self, topology: Topology, params: RadioParams, reception_charging: bool = False):
        self.topology = topology
        self.params = params
        self.reception_charging = reception_charging
        self.messages_sent = 0
        self.charges: list[float] = []

    def broadcast(self, u: int) -> None:
        nodes = self.topology.nodes
        self.charges.append(charge_broadcast(nodes[u], self.topology, self.params))
        self.messages_sent += 1
        if self.reception_charging:
            for v in sorted(self.topology.neighbors(u)):
                self.charges.append(charge_reception(nodes[v], self.params))

    def unicast(self, u: int, v: int) -> None:
        nodes = self.topology.nodes
        self.charges.append(charge_unicast(nodes[u], nodes[v], self.params))
        self.messages_sent += 1
        if self.reception_charging:
            self.charges.append(charge_reception(nodes[v], self.params))

    def finish(self, heads: Iterable[int], backbone_edges: Iterable[tuple[int, int]], partial: bool = False) -> ProtocolOutcome:
        nodes = self.topology.nodes
        head_set = set(heads)
        for node in nodes:
            node.role = Role.CLUSTER_HEAD if node.id in head_set else Role.NORMAL
        return ProtocolOutcome(
            roles=tuple(n.role for n in nodes),
            backbone_edges=frozenset((min(u, v), max(u, v)) for u, v in backbone_edges),
            messages_sent=self.messages_sent,
            consumed_energy=tuple(n.consumed_energy for n in nodes),
            charges=tuple(self.charges),
            partial=partial,
        )


def induced_edges(topology: Topology, members: set[int]) -> list[tuple[int, int]]:
    return [(u, v) for u in sorted(members) for v in sorted(topology.neighbors(u)) if u < v and v in members]


def is_connected_subset(adjacency, members: set[int]) -> bool:
    """True if ``members`` induces a connected subgraph (vacuously for <= 1 node)."""
    if len(members) <= 1:
        return True
    start = next(iter(members))
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in adjacency[u]:
            if v in members and v not in seen:
                seen.add(v)
                queue.append(v)
    return len(seen) == len(members)


def verify_cds(topology: Topology, roles: Sequence[Role]) -> CdsCheck:
    heads = {i for i, r in enumerate(roles) if r is Role.CLUSTER_HEAD}
    dominating = all(
        roles[i] is Role.CLUSTER_HEAD or not heads.isdisjoint(topology.neighbors(i))
        for i in range(len(topology))
    )
    return CdsCheck(dominating=dominating, connected=is_connected_subset(topology.adjacency, heads))
