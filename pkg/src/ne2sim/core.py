"""Geometry, deployment, unit-disk connectivity and the radio energy ledger.

Energies are in joules, distances in meters. Every protocol charges its
transmissions through :func:`charge_broadcast`, :func:`charge_unicast` and
:func:`charge_reception`, so a node's ``consumed_energy`` is always the plain
sum of the charges returned to the caller.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class BatteryDepletedError(RuntimeError):
    def __init__(self, node_id: int, consumed: float, charge: float, initial: float):
        self.node_id = node_id
        super().__init__(
            f"node {node_id} battery depleted: consumed {consumed:.6g} J + "
            f"charge {charge:.6g} J exceeds initial {initial:.6g} J"
        )


class Role(enum.Enum):
    UNASSIGNED = "unassigned"
    CLUSTER_HEAD = "clusterhead"
    NORMAL = "normal"


@dataclass(frozen=True)
class Position:
    x: float
    y: float

    def distance(self, other: Position) -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class RadioParams:
    """First-order radio constants.

    The defaults are the usual textbook magnitudes (50 nJ/bit circuit,
    100 pJ/bit/m^2 amplifier, 1000-bit control messages).
    """

    alpha0: float = 5e-8
    beta1: float = 1e-10
    msg_bits: float = 1000

    def __post_init__(self):
        if not self.alpha0 > 0:
            raise DomainError(f"alpha0 must be > 0, got {self.alpha0}")
        if not self.beta1 >= 0:
            raise DomainError(f"beta1 must be >= 0, got {self.beta1}")
        if not self.msg_bits >= 0:
            raise DomainError(f"msg_bits must be >= 0, got {self.msg_bits}")

    def cost(self, d: float) -> float:
        return energy_cost(self.msg_bits, d, self)

    @property
    def reception_cost(self) -> float:
        return self.alpha0 * self.msg_bits


@dataclass
class Node:
    id: int
    position: Position
    initial_energy: float
    consumed_energy: float = 0.0
    role: Role = Role.UNASSIGNED

    @property
    def residual_energy(self) -> float:
        return self.initial_energy - self.consumed_energy


@dataclass(frozen=True)
class DeploymentConfig:
    area_width: float = 300.0
    area_height: float = 300.0
    n_nodes: int = 100
    comm_radius: float = 100.0
    initial_energy: float = 1.0
    seed: int = 42
    pin_sink_center: bool = False

    def __post_init__(self):
        if int(self.n_nodes) != self.n_nodes or self.n_nodes < 1:
            raise DomainError(f"n_nodes must be an integer >= 1, got {self.n_nodes}")
        if not (self.area_width > 0 and self.area_height > 0):
            raise DomainError("area dimensions must be > 0")
        if not self.comm_radius > 0:
            raise DomainError(f"comm_radius must be > 0, got {self.comm_radius}")
        if not self.initial_energy > 0:
            raise DomainError(f"initial_energy must be > 0, got {self.initial_energy}")

    def with_(self, **changes) -> DeploymentConfig:
        return replace(self, **changes)


@dataclass
class Topology:
    """Unit-disk graph over deployed nodes.

    ``adjacency[i]`` is the frozenset of neighbor ids of node ``i``; node ids
    equal their index in ``nodes``.
    """

    nodes: list[Node]
    adjacency: list[frozenset[int]]
    comm_radius: float
    _dist: np.ndarray = field(repr=False, compare=False, default=None)

    def __len__(self) -> int:
        return len(self.nodes)

    def neighbors(self, i: int) -> frozenset[int]:
        return self.adjacency[i]

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    def distance(self, i: int, j: int) -> float:
        if self._dist is not None:
            return float(self._dist[i, j])
        return self.nodes[i].position.distance(self.nodes[j].position)

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(len(self.nodes)) for v in sorted(self.adjacency[u]) if u < v]

    def component(self, start: int) -> set[int]:
        seen = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in self.adjacency[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        return seen

    def components(self) -> list[set[int]]:
        left = set(range(len(self.nodes)))
        comps = []
        while left:
            comp = self.component(min(left))
            comps.append(comp)
            left -= comp
        return comps

    def is_connected(self) -> bool:
        return len(self.component(0)) == len(self.nodes)


def energy_cost(l: float, d: float, params: RadioParams) -> float:
    """Transmission cost ``(alpha0 + beta1 * d**2) * l`` of an l-bit message over d meters."""
    if l < 0:
        raise DomainError(f"message length must be >= 0, got {l}")
    if d < 0:
        raise DomainError(f"distance must be >= 0, got {d}")
    return (params.alpha0 + params.beta1 * d * d) * l


def deploy(config: DeploymentConfig) -> list[Node]:
    """Scatter ``n_nodes`` nodes uniformly over the area.

    Positions come from numpy's PCG64 generator seeded with ``config.seed``;
    x coordinates are drawn first, then y. Node 0 is the sink.
    """
    rng = np.random.Generator(np.random.PCG64(config.seed))
    xs = rng.uniform(0.0, config.area_width, config.n_nodes)
    ys = rng.uniform(0.0, config.area_height, config.n_nodes)
    if config.pin_sink_center:
        xs[0] = config.area_width / 2
        ys[0] = config.area_height / 2
    return [
        Node(id=i, position=Position(float(x), float(y)), initial_energy=config.initial_energy)
        for i, (x, y) in enumerate(zip(xs, ys))
    ]


def build_topology(nodes: Sequence[Node], comm_radius: float) -> Topology:
    if not nodes:
        raise DomainError("cannot build a topology without nodes")
    if not comm_radius > 0:
        raise DomainError(f"comm_radius must be > 0, got {comm_radius}")
    for i, node in enumerate(nodes):
        if node.id != i:
            raise DomainError(f"node at index {i} has id {node.id}")
    xy = np.array([(n.position.x, n.position.y) for n in nodes], dtype=float)
    dist = np.hypot(xy[:, None, 0] - xy[None, :, 0], xy[:, None, 1] - xy[None, :, 1])
    linked = dist <= comm_radius
    np.fill_diagonal(linked, False)
    adjacency = [frozenset(np.flatnonzero(row).tolist()) for row in linked]
    return Topology(nodes=list(nodes), adjacency=adjacency, comm_radius=comm_radius, _dist=dist)


def _charge(node: Node, amount: float) -> float:
    if node.consumed_energy + amount > node.initial_energy:
        raise BatteryDepletedError(node.id, node.consumed_energy, amount, node.initial_energy)
    node.consumed_energy += amount
    return amount


def charge_broadcast(node: Node, topology: Topology, params: RadioParams) -> float:
    """Charge one full-range broadcast (d = comm_radius) to ``node``."""
    return _charge(node, energy_cost(params.msg_bits, topology.comm_radius, params))


def charge_unicast(sender: Node, receiver: Node, params: RadioParams) -> float:
    """Charge a unicast at the actual link distance to the sender only."""
    d = sender.position.distance(receiver.position)
    return _charge(sender, energy_cost(params.msg_bits, d, params))


def charge_reception(node: Node, params: RadioParams) -> float:
    return _charge(node, params.reception_cost)
