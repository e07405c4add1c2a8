"""Regenerates the recorded service responses under frontend/fixtures/.

Seeds the deterministic sample project into a throwaway store and captures
the exact payloads the dashboard consumes.  Run from the repository root:

    python3 frontend/scripts/make_fixtures.py
"""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from pmcontrols.config import ServiceConfig
from pmcontrols.demo import seed_project
from pmcontrols.lifecycle import LifecycleEvent
from pmcontrols.service import create_app
from pmcontrols.storage import ProjectStore

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def dump(name: str, payload) -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    (FIXTURES / name).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"wrote fixtures/{name}")


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        store = ProjectStore(tmp)
        seed_project(store, "DESK-1")

        # a project stopped at the bid gate, for gate-button fixtures
        store.create_project("BID-1")
        store.apply_event(
            "BID-1",
            LifecycleEvent.from_doc(
                {"kind": "opportunity_qualified", "role": "business_engineer", "at": 0}
            ),
        )

        # a fresh project and a zero-progress project, for empty/undefined states
        store.create_project("FRESH-1")

        app = create_app(ServiceConfig(data_dir=Path(tmp)), store=store)
        with TestClient(app) as client:
            dump("indicators.json", client.get("/action/indicators/DESK-1").json())
            dump("lifecycle.json", client.get("/lifecycle/DESK-1").json())
            dump("lifecycle_bid_gate.json", client.get("/lifecycle/BID-1").json())
            dump(
                "model_typical.json",
                client.get(
                    "/technique/models/DESK-1", params={"variant": "typical_variance"}
                ).json(),
            )
            dump(
                "model_new_estimate.json",
                client.get(
                    "/technique/models/DESK-1",
                    params={"variant": "new_estimate", "new_etc": "600"},
                ).json(),
            )
            dump("feed.json", client.get("/feed/DESK-1/events", params={"from": 0}).json())
            fresh = client.get("/action/indicators/FRESH-1")
            dump("indicators_fresh_error.json", {"status": fresh.status_code, **fresh.json()})


if __name__ == "__main__":
    main()
