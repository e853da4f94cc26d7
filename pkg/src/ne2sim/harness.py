"""Seeded sweeps, per-class statistics, the published-table validator and CSV output."""

from __future__ import annotations

import csv
import io
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal
from statistics import fmean
from typing import IO, Iterable, Sequence

from .core import (
    BatteryDepletedError,
    DeploymentConfig,
    DomainError,
    RadioParams,
    Role,
    build_topology,
    deploy,
)
from .protocols import ProtocolConfig, ProtocolOutcome, run_protocol
from .statmech import ClassStats, QMode, UndefinedQError, q_factor
from .tables import AREA, PAPER_TABLES

log = logging.getLogger(__name__)

CSV_HEADER = ["area", "n_total", "n_clusterhead", "n_normal", "e_total", "e_clusterhead", "e_normal", "q", "seed"]
VALIDATION_TOLERANCE = 5e-3


class DegenerateClassError(ValueError):
    def __init__(self, role: str):
        self.role = role
        super().__init__(f"degenerate class: no {role} nodes, class mean undefined")


@dataclass(frozen=True)
class ExperimentConfig:
    deployment: DeploymentConfig = field(default_factory=DeploymentConfig)
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    radio: RadioParams = field(default_factory=RadioParams)
    node_counts: tuple[int, ...] = tuple(range(20, 101, 10))
    trials_per_count: int = 10
    base_seed: int = 42

    def __post_init__(self):
        object.__setattr__(self, "node_counts", tuple(self.node_counts))
        if not self.node_counts:
            raise DomainError("node_counts must not be empty")
        if self.trials_per_count < 1:
            raise DomainError("trials_per_count must be >= 1")


@dataclass(frozen=True)
class TrialRow:
    area: str
    n_total: int
    n_ch: int | None = None
    n_normal: int | None = None
    e_total: float | None = None
    e_ch: float | None = None
    e_normal: float | None = None
    q: float | None = None
    seed: int | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def stats(self) -> ClassStats:
        return ClassStats(self.n_total, self.n_ch, self.n_normal, self.e_total, self.e_ch, self.e_normal)


@dataclass(frozen=True)
class PaperTable:
    label: str
    rows: tuple[TrialRow, ...]
    band: float


@dataclass(frozen=True)
class RowReport:
    table: str
    n_total: int
    eq5_q: float
    reciprocal_q: float
    printed_q: float
    relative_error: float
    within_band: bool
    counts_consistent: bool


@dataclass(frozen=True)
class TableValidation:
    rows: tuple[RowReport, ...]
    max_relative_error: float
    passed: bool


@dataclass(frozen=True)
class BandResult:
    pass_fraction: float
    max_deviation: float
    n_rows: int


def paper_tables() -> list[PaperTable]:
    return [
        PaperTable(
            label=label,
            rows=tuple(TrialRow(AREA, *row) for row in rows),
            band=band,
        )
        for label, (rows, band) in PAPER_TABLES.items()
    ]


def class_stats(outcome: ProtocolOutcome, weighted_total: bool = False) -> ClassStats:
    """Mean consumed energy per class.

    The whole-network figure is the midpoint of the two class means unless
    ``weighted_total`` asks for the node-weighted mean instead.
    """
    heads = [e for e, r in zip(outcome.consumed_energy, outcome.roles) if r is Role.CLUSTER_HEAD]
    normals = [e for e, r in zip(outcome.consumed_energy, outcome.roles) if r is Role.NORMAL]
    if not heads:
        raise DegenerateClassError("cluster-head")
    if not normals:
        raise DegenerateClassError("normal")
    e_ch, e_normal = fmean(heads), fmean(normals)
    if weighted_total:
        e_total = fmean(heads + normals)
    else:
        e_total = (e_ch + e_normal) / 2
    n = len(heads) + len(normals)
    return ClassStats(n, len(heads), len(normals), e_total, e_ch, e_normal)


def area_label(deployment: DeploymentConfig) -> str:
    return f"{deployment.area_width:g}X{deployment.area_height:g}"


def run_trial(config: ExperimentConfig, n: int, seed: int) -> TrialRow:
    deployment = config.deployment.with_(n_nodes=n, seed=seed)
    nodes = deploy(deployment)
    topology = build_topology(nodes, deployment.comm_radius)
    outcome = run_protocol(topology, config.protocol, config.radio)
    stats = class_stats(outcome)
    return TrialRow(
        area=area_label(deployment),
        n_total=stats.n_total,
        n_ch=stats.n_ch,
        n_normal=stats.n_normal,
        e_total=stats.e_total,
        e_ch=stats.e_ch,
        e_normal=stats.e_normal,
        q=q_factor(stats, QMode.TABLE_CONVENTION),
        seed=seed,
    )


def _trial_or_error(args) -> TrialRow:
    config, n, seed = args
    try:
        return run_trial(config, n, seed)
    except (DomainError, DegenerateClassError, BatteryDepletedError, UndefinedQError) as exc:
        log.warning("trial n=%d seed=%d failed: %s", n, seed, exc)
        return TrialRow(area=area_label(config.deployment), n_total=n, seed=seed, error=str(exc))


def sweep_plan(config: ExperimentConfig) -> list[tuple[int, int]]:
    """(n, seed) pairs in emission order; seeds are base_seed + running index."""
    plan = []
    for n in sorted(config.node_counts):
        for _ in range(config.trials_per_count):
            plan.append((n, config.base_seed + len(plan)))
    return plan


def run_sweep(config: ExperimentConfig, workers: int = 1) -> list[TrialRow]:
    jobs = [(config, n, seed) for n, seed in sweep_plan(config)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_trial_or_error, jobs, chunksize=4))
    return [_trial_or_error(job) for job in jobs]


def validate_paper_tables() -> TableValidation:
    """Recompute Q from every published row's own N and E values."""
    reports = []
    for table in paper_tables():
        for row in table.rows:
            stats = row.stats
            eq5 = q_factor(stats, QMode.AS_WRITTEN)
            recip = q_factor(stats, QMode.TABLE_CONVENTION)
            reports.append(
                RowReport(
                    table=table.label,
                    n_total=row.n_total,
                    eq5_q=eq5,
                    reciprocal_q=recip,
                    printed_q=row.q,
                    relative_error=abs(recip - row.q) / row.q,
                    within_band=abs(row.q - 1) <= table.band,
                    counts_consistent=row.n_ch + row.n_normal == row.n_total,
                )
            )
    worst = max(r.relative_error for r in reports)
    return TableValidation(tuple(reports), worst, worst <= VALIDATION_TOLERANCE)


def _half_unit(value: float) -> Decimal:
    return Decimal(1).scaleb(Decimal(repr(value)).as_tuple().exponent) / 2


def total_convention_gaps(tolerance: float | None = 5e-7) -> list[tuple[str, int, Decimal, Decimal]]:
    """Per published row: |E_Total - (E_ch + E_normal)/2| in exact decimal arithmetic.

    Returns ``(table, n_total, gap, limit)``. With ``tolerance=None`` the limit
    is the rounding slack implied by each row's printed digits.
    """
    out = []
    for table in paper_tables():
        for r in table.rows:
            total, ch, normal = (Decimal(repr(x)) for x in (r.e_total, r.e_ch, r.e_normal))
            gap = abs(total - (ch + normal) / 2)
            if tolerance is None:
                limit = _half_unit(r.e_total) + (_half_unit(r.e_ch) + _half_unit(r.e_normal)) / 2
            else:
                limit = Decimal(repr(tolerance))
            out.append((table.label, r.n_total, gap, limit))
    return out


def band_check(rows: Iterable[TrialRow], band: float) -> BandResult:
    """Fraction of rows with |Q - 1| <= band; error rows are left out."""
    deviations = [abs(r.q - 1) for r in rows if r.error is None]
    if not deviations:
        raise DomainError("band_check needs at least one non-error row")
    inside = sum(d <= band for d in deviations)
    return BandResult(inside / len(deviations), max(deviations), len(deviations))


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".9g")
    return str(value)


def emit_csv(rows: Sequence[TrialRow], destination: str | os.PathLike | IO | None = None) -> bytes:
    """Render rows as CSV and write them to ``destination`` if given.

    Error rows keep only area, n_total and seed.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow(
            _fmt(v) for v in (r.area, r.n_total, r.n_ch, r.n_normal, r.e_total, r.e_ch, r.e_normal, r.q, r.seed)
        )
    data = buf.getvalue().encode("utf-8")
    if destination is None:
        return data
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "wb") as fh:
            fh.write(data)
    elif isinstance(destination, io.TextIOBase):
        destination.write(data.decode("utf-8"))
    else:
        destination.write(data)
    return data
