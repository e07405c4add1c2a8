"""Operator command line.

    pmctl init P1                      create a project
    pmctl advance P1 --event ...       record a lifecycle event
    pmctl import-baseline P1 FILE      load the time-phased plan
    pmctl record-progress P1 FILE      load a progress snapshot
    pmctl report P1 [--format ...]     print indicators and diagnostics
    pmctl export-scurve P1 --out FILE  write the PV/EV/AC series as CSV
    pmctl demo [P1]                    seed the deterministic sample project
    pmctl serve [--config FILE]        run the HTTP service

Exit codes partition outcomes: 0 all clear / proceed to the next cycle,
2 input or state error, 3 variances call for investigation.  Commands run
against the local data directory by default; ``--remote URL`` targets a
running service instead.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import socket
import sys
from pathlib import Path
from typing import Optional

from .config import ServiceConfig, load_config
from .demo import DEMO_PROJECT_ID, seed_project
from .diagnostics import CycleStep
from .errors import ConfigInvalid, PmControlsError, ValidationFailed
from .evm import Baseline, ProgressSnapshot, compute_ac, compute_ev, compute_pv
from .lifecycle import LifecycleEvent
from .money import TimePoint, format_money
from .reports import (
    indicator_payload,
    lifecycle_payload,
    project_summary,
    require_baseline,
)
from .storage import ProjectStore, canonical_json

EXIT_OK = 0
EXIT_ERROR = 2
EXIT_INVESTIGATE = 3

UNDEFINED = "—"  # em dash shown for undefined indices


def _read_json_file(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationFailed(f"cannot read {path}: {exc}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationFailed(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}")


class LocalEngine:
    """Runs commands against the storage engine in-process."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.store = ProjectStore(config.data_dir)

    def init(self, project_id: str) -> dict:
        return project_summary(self.store.create_project(project_id))

    def import_baseline(self, project_id: str, doc, rebaseline: bool) -> dict:
        baseline = Baseline.from_doc(doc)
        if baseline.project_id != project_id:
            raise ValidationFailed(
                f"file is for project {baseline.project_id!r}, not {project_id!r}",
                pointer="project_id",
            )
        stored, _ = self.store.set_baseline(project_id, baseline, rebaseline=rebaseline)
        return {
            "project_id": project_id,
            "revision": stored.revision,
            "bac": format_money(baseline.bac),
            "task_count": len(baseline.tasks),
        }

    def record_progress(self, project_id: str, doc) -> dict:
        snapshot = ProgressSnapshot.from_doc(doc)
        if snapshot.project_id != project_id:
            raise ValidationFailed(
                f"file is for project {snapshot.project_id!r}, not {project_id!r}",
                pointer="project_id",
            )
        stored, _, warnings = self.store.record_snapshot(project_id, snapshot)
        return {
            "project_id": project_id,
            "revision": stored.revision,
            "status_date": snapshot.status_date.canonical(),
            "warnings": warnings,
        }

    def advance(self, project_id: str, event_doc: dict) -> dict:
        event = LifecycleEvent.from_doc(event_doc)
        stored, _ = self.store.apply_event(project_id, event)
        return lifecycle_payload(stored)

    def report(self, project_id: str) -> dict:
        return indicator_payload(
            self.store.get(project_id),
            thresholds=self.config.thresholds,
            actions=self.config.actions,
        )

    def scurve_rows(self, project_id: str) -> list[tuple[str, str, str, str]]:
        record = self.store.get(project_id).record
        baseline = require_baseline(record)
        times = sorted(
            set(baseline.plan_times()) | {s.status_date for s in record.snapshots}
        )
        by_date = {s.status_date: s for s in record.snapshots}
        rows = []
        for t in times:
            snapshot = by_date.get(t)
            if snapshot is not None:
                ev = format_money(compute_ev(baseline, snapshot))
                ac = format_money(compute_ac(snapshot))
            else:
                ev = ac = ""
            rows.append((t.canonical(), format_money(compute_pv(baseline, t)), ev, ac))
        return rows

    def demo(self, project_id: str) -> dict:
        return project_summary(seed_project(self.store, project_id))


class RemoteEngine:
    """Runs commands against a running service over HTTP."""

    def __init__(self, base_url: str):
        import httpx

        self.client = httpx.Client(base_url=base_url.rstrip("/"), timeout=30.0)

    def _unwrap(self, response) -> dict:
        if response.status_code >= 400:
            try:
                body = response.json()
            except ValueError:
                raise PmControlsError(f"HTTP {response.status_code}: {response.text[:200]}")
            error = _error_for_code(body.get("error", "error"), body.get("detail", ""))
            raise error
        return response.json()

    def init(self, project_id: str) -> dict:
        return self._unwrap(self.client.post("/data/projects", json={"project_id": project_id}))

    def import_baseline(self, project_id: str, doc, rebaseline: bool) -> dict:
        return self._unwrap(
            self.client.put(
                f"/data/projects/{project_id}/baseline",
                json=doc,
                params={"rebaseline": str(rebaseline).lower()},
            )
        )

    def record_progress(self, project_id: str, doc) -> dict:
        return self._unwrap(self.client.post(f"/data/projects/{project_id}/snapshots", json=doc))

    def advance(self, project_id: str, event_doc: dict) -> dict:
        headers = {"X-Role": event_doc.get("role", "")}
        return self._unwrap(
            self.client.post(f"/lifecycle/{project_id}/events", json=event_doc, headers=headers)
        )

    def report(self, project_id: str) -> dict:
        return self._unwrap(self.client.get(f"/action/indicators/{project_id}"))

    def scurve_rows(self, project_id: str) -> list[tuple[str, str, str, str]]:
        payload = self._unwrap(self.client.get(f"/action/indicators/{project_id}"))
        series = payload["s_curve"]
        pv_by_t = {point["t"]: point["value"] for point in series["pv"]}
        ev_by_t = {point["t"]: point["value"] for point in series["ev"]}
        ac_by_t = {point["t"]: point["value"] for point in series["ac"]}
        extra = [t for t in ev_by_t if t not in pv_by_t]
        for t in extra:
            indices = self._unwrap(
                self.client.get(f"/data/indices/{project_id}", params={"status_date": t})
            )
            pv_by_t[t] = indices["pv"]
        times = sorted(pv_by_t, key=lambda t: TimePoint.parse(t).ordinal())
        return [(t, pv_by_t[t], ev_by_t.get(t, ""), ac_by_t.get(t, "")) for t in times]

    def demo(self, project_id: str) -> dict:
        raise ValidationFailed("demo seeding is only available against the local data directory")


def _error_for_code(code: str, message: str) -> PmControlsError:
    for subclass in PmControlsError.__subclasses__():
        if subclass.code == code:
            if subclass is ValidationFailed:
                return ValidationFailed(message)
            return subclass(message)
    return PmControlsError(message or code)


def _render_table(payload: dict) -> str:
    metrics = payload["metrics"]
    diagnostics = payload["diagnostics"]

    def ratio(value) -> str:
        return UNDEFINED if value is None else f"{value:.4f}"

    def amount(value) -> str:
        return UNDEFINED if value is None else value

    lines = [
        f"project        {payload['project_id']}",
        f"status date    {metrics['status_date']}",
        "",
        f"  PV   {amount(metrics['pv']):>16}    CV   {amount(metrics['cv']):>16}",
        f"  EV   {amount(metrics['ev']):>16}    SV   {amount(metrics['sv']):>16}",
        f"  AC   {amount(metrics['ac']):>16}    CPI  {ratio(metrics['cpi']):>16}",
        f"  BAC  {amount(metrics['bac']):>16}    SPI  {ratio(metrics['spi']):>16}",
        "",
        f"  EAC  {amount(metrics['eac']):>16}    variant: {metrics['selected_variant'] or UNDEFINED}",
        f"  ETC  {amount(metrics['etc']):>16}",
        f"  VAC  {amount(metrics['vac']):>16}",
        "",
        f"reading        {diagnostics['quadrant_label']} ({diagnostics['severity']})",
        f"recommended    {diagnostics['recommended_variant'] or UNDEFINED}",
    ]
    forecast = diagnostics.get("time_forecast")
    if forecast:
        lines.append(
            f"time forecast  finish ~ {forecast['forecast_finish']} "
            f"(planned {forecast['planned_duration']:g}, now {forecast['forecast_duration']:g} periods; "
            f"{forecast['method']})"
        )
    if diagnostics["actions"]:
        lines.append("actions")
        for action in diagnostics["actions"]:
            lines.append(f"  - [{action['id']}] {action['description']}")
    lines.append(f"next step      {payload['next_step']}")
    return "\n".join(lines) + "\n"


def _cmd_report(engine, args) -> int:
    payload = engine.report(args.project_id)
    if args.format == "structured":
        sys.stdout.write(canonical_json(payload) + "\n")
    else:
        sys.stdout.write(_render_table(payload))
    if payload["next_step"] == CycleStep.INVESTIGATE_AND_CORRECT.value:
        return EXIT_INVESTIGATE
    return EXIT_OK


def _cmd_export_scurve(engine, args) -> int:
    rows = engine.scurve_rows(args.project_id)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["t", "pv", "ev", "ac"])
    writer.writerows(rows)
    Path(args.out).write_text(buffer.getvalue(), encoding="utf-8")
    sys.stdout.write(f"wrote {len(rows)} rows to {args.out}\n")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = load_config(args.config)
    # Fail with a clear message if the address cannot be bound.
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((config.host, config.port))
    except OSError as exc:
        sys.stderr.write(f"error [bind_failure]: cannot bind {config.host}:{config.port}: {exc}\n")
        return EXIT_ERROR
    finally:
        probe.close()
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pmctl", description="Earned-value project controls."
    )
    parser.add_argument("--data-dir", help="project data directory (default ./pmcontrols-data)")
    parser.add_argument("--config", help="service/config file (YAML or JSON)")
    parser.add_argument("--remote", metavar="URL", help="target a running service instead")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="create a project")
    p.add_argument("project_id")

    p = sub.add_parser("import-baseline", help="load the time-phased plan from a JSON file")
    p.add_argument("project_id")
    p.add_argument("file")
    p.add_argument("--rebaseline", action="store_true",
                   help="replace a locked baseline, archiving the old one")

    p = sub.add_parser("record-progress", help="load a progress snapshot from a JSON file")
    p.add_argument("project_id")
    p.add_argument("file")

    p = sub.add_parser("advance", help="record a lifecycle event")
    p.add_argument("project_id")
    p.add_argument("--event", required=True, help="event kind, e.g. contract_signed")
    p.add_argument("--role", required=True, help="acting role, e.g. project_manager")
    p.add_argument("--at", required=True, help="time point (period number or YYYY-MM-DD)")
    p.add_argument("--outcome", choices=["go", "no_go"], help="for decision gates")

    p = sub.add_parser("report", help="print indicators and diagnostics")
    p.add_argument("project_id")
    p.add_argument("--format", choices=["table", "structured"], default="table")

    p = sub.add_parser("export-scurve", help="write the PV/EV/AC series as CSV")
    p.add_argument("project_id")
    p.add_argument("--out", required=True)

    p = sub.add_parser("demo", help="seed the deterministic sample project")
    p.add_argument("project_id", nargs="?", default=DEMO_PROJECT_ID)

    p = sub.add_parser("serve", help="run the HTTP service")
    # also accepted after the subcommand; SUPPRESS keeps the global value
    # from being clobbered when the flag is absent here
    p.add_argument("--config", default=argparse.SUPPRESS,
                   help="service/config file (YAML or JSON)")

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        if args.command == "serve":
            if args.remote:
                raise ValidationFailed("serve does not take --remote")
            return _cmd_serve(args)

        if args.remote:
            engine = RemoteEngine(args.remote)
        else:
            config = load_config(args.config)
            if args.data_dir:
                from dataclasses import replace

                config = replace(config, data_dir=Path(args.data_dir))
            engine = LocalEngine(config)

        if args.command == "init":
            summary = engine.init(args.project_id)
            sys.stdout.write(
                f"created project {summary['project_id']} "
                f"(phase {summary['phase']}, revision {summary['revision']})\n"
            )
            return EXIT_OK
        if args.command == "import-baseline":
            doc = _read_json_file(args.file)
            result = engine.import_baseline(args.project_id, doc, args.rebaseline)
            sys.stdout.write(
                f"baseline stored: {result['task_count']} tasks, BAC {result['bac']} "
                f"(revision {result['revision']})\n"
            )
            return EXIT_OK
        if args.command == "record-progress":
            doc = _read_json_file(args.file)
            result = engine.record_progress(args.project_id, doc)
            for warning in result.get("warnings", []):
                sys.stderr.write(f"warning: {warning}\n")
            sys.stdout.write(
                f"snapshot recorded at {result['status_date']} (revision {result['revision']})\n"
            )
            return EXIT_OK
        if args.command == "advance":
            event_doc = {"kind": args.event, "role": args.role, "at": args.at}
            if args.outcome:
                event_doc["outcome"] = args.outcome
            result = engine.advance(args.project_id, event_doc)
            sys.stdout.write(f"phase: {result['phase']} (revision {result['revision']})\n")
            return EXIT_OK
        if args.command == "report":
            return _cmd_report(engine, args)
        if args.command == "export-scurve":
            return _cmd_export_scurve(engine, args)
        if args.command == "demo":
            summary = engine.demo(args.project_id)
            sys.stdout.write(
                f"seeded {summary['project_id']}: phase {summary['phase']}, "
                f"{summary['snapshot_count']} snapshots (revision {summary['revision']})\n"
            )
            return EXIT_OK
        parser.error(f"unknown command {args.command!r}")  # pragma: no cover
    except ConfigInvalid as exc:
        sys.stderr.write(f"error [{exc.code}]: {exc.message}\n")
        return EXIT_ERROR
    except PmControlsError as exc:
        sys.stderr.write(f"error [{exc.code}]: {exc.message}\n")
        return EXIT_ERROR
    return EXIT_ERROR  # pragma: no cover


def console_main() -> None:  # pragma: no cover - thin wrapper
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    console_main()
