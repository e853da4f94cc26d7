"""Topology-control protocols that split nodes into cluster-heads and normal nodes."""

from ..core import RadioParams, Topology
from .a3 import run_a3
from .base import CdsCheck, Channel, ProtocolConfig, ProtocolKind, ProtocolOutcome, verify_cds
from .cds_rule_k import run_cds_rule_k
from .eecds import run_eecds

RUNNERS = {
    ProtocolKind.CDS_RULE_K: run_cds_rule_k,
    ProtocolKind.A3: run_a3,
    ProtocolKind.EECDS: run_eecds,
}


def run_protocol(topology: Topology, config: ProtocolConfig, params: RadioParams) -> ProtocolOutcome:
    return RUNNERS[config.kind](topology, config, params)


__all__ = [
    "CdsCheck",
    "Channel",
    "ProtocolConfig",
    "ProtocolKind",
    "ProtocolOutcome",
    "run_a3",
    "run_cds_rule_k",
    "run_eecds",
    "run_protocol",
    "verify_cds",
]
