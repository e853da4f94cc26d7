"""Command-line driver.

Exit codes: 0 success, 1 validation or run failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from . import checks
from .core import DeploymentConfig, DomainError, RadioParams, deploy
from .harness import ExperimentConfig, emit_csv, paper_tables, run_sweep, run_trial, validate_paper_tables
from .protocols import ProtocolConfig, ProtocolKind

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("ne2sim")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class CliConfig:
    area_width: float = 300.0
    area_height: float = 300.0
    n_nodes: int = 100
    comm_radius: float = 100.0
    initial_energy_j: float = 1.0
    alpha0: float = 5e-8
    beta1: float = 1e-10
    msg_bits: float = 1000.0
    protocol: str = "cds-rule-k"
    rule_k: int = 2
    a3_energy_weight: float = 0.5
    reception_charging: bool = False
    seed: int = 42
    node_counts: tuple[int, ...] = tuple(range(20, 101, 10))
    trials: int = 10
    output_path: str = ""

    def deployment(self) -> DeploymentConfig:
        return DeploymentConfig(
            area_width=self.area_width,
            area_height=self.area_height,
            n_nodes=self.n_nodes,
            comm_radius=self.comm_radius,
            initial_energy=self.initial_energy_j,
            seed=self.seed,
        )

    def radio(self) -> RadioParams:
        return RadioParams(alpha0=self.alpha0, beta1=self.beta1, msg_bits=self.msg_bits)

    def protocol_config(self) -> ProtocolConfig:
        return ProtocolConfig(
            kind=ProtocolKind(self.protocol),
            rule_k=self.rule_k,
            a3_energy_weight=self.a3_energy_weight,
            reception_charging=self.reception_charging,
        )

    def experiment(self) -> ExperimentConfig:
        return ExperimentConfig(
            deployment=self.deployment(),
            protocol=self.protocol_config(),
            radio=self.radio(),
            node_counts=self.node_counts,
            trials_per_count=self.trials,
            base_seed=self.seed,
        )

    def render(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = ",".join(map(str, value))
            elif isinstance(value, bool):
                value = str(value).lower()
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"


KEYS = {f.name: f for f in fields(CliConfig)}


def _parse_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_counts(text: str) -> tuple[int, ...]:
    counts = tuple(int(part) for part in text.replace(" ", "").split(",") if part)
    if not counts:
        raise ValueError("empty node count list")
    return counts


PARSERS = {
    "float": float,
    "int": int,
    "str": str,
    "bool": _parse_bool,
    "tuple[int, ...]": _parse_counts,
}


def _convert(key: str, raw: str):
    return PARSERS[KEYS[key].type](raw)


def _validate(values: dict, origin: dict) -> CliConfig:
    config = CliConfig(**values)

    def where(*keys):
        return next((origin[k] for k in keys if k in origin), None)

    checks_ = [
        (("area_width", "area_height", "n_nodes", "comm_radius", "initial_energy_j", "seed"), config.deployment),
        (("alpha0", "beta1", "msg_bits"), config.radio),
        (("protocol", "rule_k", "a3_energy_weight", "reception_charging"), config.protocol_config),
        (("node_counts", "trials"), config.experiment),
    ]
    for keys, build in checks_:
        try:
            build()
        except (DomainError, ValueError) as exc:
            raise ConfigError(str(exc), where(*keys)) from None
    if any(n < 1 for n in config.node_counts):
        raise ConfigError("node_counts entries must be >= 1", where("node_counts"))
    return config


def parse_config(text: str | bytes = "", overrides: dict[str, str] | None = None) -> CliConfig:
    """Build a config from ``key = value`` text plus flag overrides (flags win)."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ConfigError(f"config is not UTF-8: {exc}") from None
    values: dict = {}
    origin: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        try:
            values[key] = _convert(key, raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}", lineno) from None
        origin[key] = lineno
    for key, raw in (overrides or {}).items():
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}")
        try:
            values[key] = _convert(key, raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for --{key.replace('_', '-')}: {exc}") from None
        origin.pop(key, None)
    return _validate(values, origin)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value configuration file")
    common.add_argument("--print-config", action="store_true", help="print the effective configuration and exit")
    common.add_argument("-v", "--verbose", action="store_true")
    group = common.add_argument_group("configuration overrides")
    for name in KEYS:
        group.add_argument("--" + name.replace("_", "-"), dest="cfg_" + name, metavar="VALUE")

    parser = argparse.ArgumentParser(prog="ne2sim", description="WSN topology-control simulator and NE^2 checks")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("deploy", parents=[common], help="print node positions as CSV")
    sub.add_parser("run", parents=[common], help="run one trial and print its row as CSV")
    sweep = sub.add_parser("sweep", parents=[common], help="run a seeded sweep and write CSV")
    sweep.add_argument("--workers", type=int, default=1)
    tables = sub.add_parser("validate-tables", parents=[common], help="recompute Q for the published tables")
    tables.add_argument("--dump-tables", type=Path, metavar="CSV", help="also write the embedded rows to CSV")
    sub.add_parser("maxent-check", parents=[common], help="run the max-ent self-checks")
    return parser


def _cmd_deploy(config: CliConfig) -> int:
    out = sys.stdout
    out.write("id,x,y\n")
    for node in deploy(config.deployment()):
        out.write(f"{node.id},{node.position.x:.9g},{node.position.y:.9g}\n")
    return EXIT_OK


def _cmd_run(config: CliConfig) -> int:
    row = run_trial(config.experiment(), config.n_nodes, config.seed)
    sys.stdout.write(emit_csv([row]).decode())
    return EXIT_OK


def _cmd_sweep(config: CliConfig, workers: int) -> int:
    rows = run_sweep(config.experiment(), workers=workers)
    failed = sum(not r.ok for r in rows)
    if failed:
        log.warning("%d of %d trials failed (blank fields in CSV)", failed, len(rows))
    if config.output_path:
        emit_csv(rows, config.output_path)
        log.info("wrote %d rows to %s", len(rows), config.output_path)
    else:
        sys.stdout.write(emit_csv(rows).decode())
    return EXIT_OK


def _cmd_validate(dump: Path | None) -> int:
    report = validate_paper_tables()
    for r in report.rows:
        flags = []
        if not r.within_band:
            flags.append("outside-claimed-band")
        if not r.counts_consistent:
            flags.append("counts-inconsistent")
        print(
            f"{r.table} n={r.n_total} eq5_q={r.eq5_q:.9g} reciprocal_q={r.reciprocal_q:.9g} "
            f"printed_q={r.printed_q:.9g} rel_err={r.relative_error:.3e}" + (" " + ",".join(flags) if flags else "")
        )
    if dump is not None:
        emit_csv([row for t in paper_tables() for row in t.rows], dump)
    verdict = "PASS" if report.passed else "FAIL"
    print(f"{verdict}: max relative error {report.max_relative_error:.3e} (limit 5e-3)", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


def _cmd_maxent() -> int:
    results = checks.run_all()
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s", stream=sys.stderr)
    overrides = {name: getattr(args, "cfg_" + name) for name in KEYS if getattr(args, "cfg_" + name) is not None}
    try:
        text = args.config.read_bytes() if args.config else b""
        config = parse_config(text, overrides)
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.print_config:
        sys.stdout.write(config.render())
        return EXIT_OK
    try:
        if args.command == "deploy":
            return _cmd_deploy(config)
        if args.command == "run":
            return _cmd_run(config)
        if args.command == "sweep":
            return _cmd_sweep(config, args.workers)
        if args.command == "validate-tables":
            return _cmd_validate(args.dump_tables)
        return _cmd_maxent()
    except Exception as exc:  # every failure path maps to exit 1
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
