"""Command-line interface.

Exit codes: 0 success, 2 usage or input error, 3 protocol failure, 4 check failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .costs import (
    CostTable,
    convert_gas,
    default_cost_table,
    load_cost_table,
    overhead_counts,
    per_user_gas,
    system_gas,
)
from .errors import InvalidCosts, ProtocolError, UnexpectedSuccess
from .ledger import MalformedSnapshot, canonical_json, load_snapshot, scan_snapshot
from .simulator import FAULTS, SCHEDULE_ALIASES, SCHEDULES, Session, SessionConfig, SessionFailure, decimal_str, run_adversarial
from .topology import Config, dimension_count, peer_index

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PROTOCOL = 3
EXIT_CHECK = 4


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.replace(",", " ").split()]
    except ValueError as exc:
        raise UsageError(f"expected integers, got {text!r}") from exc


def _cost_table(path: str | None) -> CostTable:
    if path is None:
        return default_cost_table()
    try:
        return load_cost_table(path)
    except (OSError, json.JSONDecodeError, InvalidCosts) as exc:
        raise UsageError(f"cannot load cost table {path}: {exc}") from exc


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


# -- run ----------------------------------------------------------------------


def cmd_run(args: argparse.Namespace) -> int:
    secrets = _int_list(args.secrets) if args.secrets else None
    try:
        cfg = SessionConfig(
            n_parties=args.parties,
            master_seed=args.seed,
            secrets=secrets,
            schedule=args.schedule,
            cost_table=_cost_table(args.cost_table),
            secret_bits=args.secret_bits,
        )
    except (ProtocolError, ValueError) as exc:
        raise UsageError(f"{type(exc).__name__}: {exc}") from exc

    if args.fault:
        try:
            fault = run_adversarial(cfg, args.fault)
        except UnexpectedSuccess as exc:
            print(f"UnexpectedSuccess: {exc}", file=sys.stderr)
            return EXIT_CHECK
        _emit(fault.to_json(), args.out)
        return EXIT_OK if fault.contained else EXIT_CHECK

    session = Session(cfg)
    try:
        report = session.run()
    except SessionFailure as failure:
        print(str(failure), file=sys.stderr)
        print(canonical_json([e.__dict__ for e in failure.transcript]), file=sys.stderr)
        return EXIT_PROTOCOL
    if args.snapshot:
        Path(args.snapshot).write_text(session.ledger.snapshot_json() + "\n")
    _emit(report.to_json(), args.out)
    return EXIT_OK


# -- pair ---------------------------------------------------------------------


def cmd_pair(args: argparse.Namespace) -> int:
    try:
        d = dimension_count(args.n)
        print(peer_index(args.id, args.stage, d, Config.parse(args.config)))
    except (ProtocolError, ValueError) as exc:
        raise UsageError(f"{type(exc).__name__}: {exc}") from exc
    return EXIT_OK


# -- costs --------------------------------------------------------------------


def cost_report(n: int, table: CostTable) -> dict:
    user = per_user_gas(n, table)
    system = system_gas(n, table)
    user_native, user_usd = convert_gas(user, table)
    system_native, system_usd = convert_gas(system, table)
    overheads = overhead_counts(n)
    return {
        "parties": n,
        "stages": dimension_count(n),
        "gas_deploy": table.gas_deploy,
        "gas_per_user": user,
        "gas_system": system,
        "native_per_user": decimal_str(user_native),
        "usd_per_user": decimal_str(user_usd),
        "native_system": decimal_str(system_native),
        "usd_system": decimal_str(system_usd),
        **{k: getattr(overheads, k) for k in overheads.__dataclass_fields__},
    }


def cmd_costs(args: argparse.Namespace) -> int:
    table = _cost_table(args.cost_table)
    try:
        report = cost_report(args.parties, table)
    except ProtocolError as exc:
        raise UsageError(f"{type(exc).__name__}: {exc}") from exc
    if args.format == "json":
        _emit(canonical_json(report), args.out)
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(report.keys())
        writer.writerow(report.values())
        _emit(buf.getvalue().rstrip("\n"), args.out)
    return EXIT_OK


# -- inspect ------------------------------------------------------------------


def _read_secrets(path: str) -> list[int]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read secrets file: {exc}") from exc
    stripped = text.strip()
    if stripped.startswith("["):
        try:
            values = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise UsageError(f"bad secrets file: {exc}") from exc
        if not all(isinstance(v, int) for v in values):
            raise UsageError("secrets file must list integers")
        return values
    return _int_list(stripped)


def cmd_inspect(args: argparse.Namespace) -> int:
    try:
        snapshot = load_snapshot(Path(args.snapshot).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read snapshot: {exc}") from exc
    except MalformedSnapshot as exc:
        raise UsageError(f"parse error: {exc}") from exc

    if args.check is None:
        summary = {
            "registered": len(snapshot["registered_users"]),
            "current_stage": snapshot["current_stage"],
            "max_stage": snapshot.get("max_stage"),
            "registration_closed": snapshot.get("registration_closed"),
            "mailbox_entries_a": sum(len(v) for v in snapshot["secret_messages_a"].values()),
            "mailbox_entries_b": sum(len(v) for v in snapshot["secret_messages_b"].values()),
        }
        print(canonical_json(summary))
        return EXIT_OK

    if not args.secrets_file:
        raise UsageError("--check no-plaintext requires --secrets-file")
    values = _read_secrets(args.secrets_file)
    try:
        hits = scan_snapshot(snapshot, values)
    except ProtocolError as exc:
        raise UsageError(f"bad secret value: {exc}") from exc
    if not hits:
        print(f"no plaintext found ({len(values)} values scanned)")
        return EXIT_OK
    for value, path in hits:
        print(f"plaintext {value} found at {path}")
    return EXIT_CHECK


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hypersum", description="Hypercube-masked private summation on an emulated ledger.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a full session and print the report as JSON")
    run.add_argument("--parties", type=int, required=True, help="number of parties (power of two >= 2)")
    run.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    run.add_argument("--secrets", help="comma-separated secret values, one per party")
    run.add_argument("--schedule", default="sequential", choices=[*SCHEDULES, *SCHEDULE_ALIASES])
    run.add_argument("--secret-bits", type=int, default=32, help="bit width of random or given secrets (max 64)")
    run.add_argument("--cost-table", help="JSON file overriding gas constants")
    run.add_argument("--fault", choices=FAULTS, help="inject a fault by party 0 and report where it is caught")
    run.add_argument("--snapshot", help="also write the final ledger snapshot to this path")
    run.add_argument("--out", help="write the report here instead of stdout")
    run.set_defaults(func=cmd_run)

    pair = sub.add_parser("pair", help="print the peer of a party at a stage")
    pair.add_argument("--n", type=int, required=True, help="number of parties")
    pair.add_argument("--stage", type=int, required=True)
    pair.add_argument("--config", required=True, choices=["A", "B", "a", "b"])
    pair.add_argument("--id", type=int, required=True, help="party index")
    pair.set_defaults(func=cmd_pair)

    costs = sub.add_parser("costs", help="modelled gas and overhead counts for N parties")
    costs.add_argument("--parties", type=int, required=True)
    costs.add_argument("--cost-table", help="JSON file overriding gas constants")
    costs.add_argument("--format", choices=["json", "csv"], default="json")
    costs.add_argument("--out", help="write the report here instead of stdout")
    costs.set_defaults(func=cmd_costs)

    inspect = sub.add_parser("inspect", help="summarize or scan a ledger snapshot")
    inspect.add_argument("--snapshot", required=True)
    inspect.add_argument("--check", choices=["no-plaintext"])
    inspect.add_argument("--secrets-file", help="JSON list or comma-separated integers to scan for")
    inspect.set_defaults(func=cmd_inspect)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on bad flags
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
