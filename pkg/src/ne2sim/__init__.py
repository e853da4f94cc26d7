"""Wireless sensor network topology-control simulator with NE^2 conservation checks."""

from .core import (
    BatteryDepletedError,
    DeploymentConfig,
    DomainError,
    Node,
    Position,
    RadioParams,
    Role,
    Topology,
    build_topology,
    deploy,
    energy_cost,
)
from .protocols import ProtocolConfig, ProtocolKind, ProtocolOutcome, run_protocol, verify_cds

__version__ = "0.1.0"
