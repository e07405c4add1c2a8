from __future__ import annotations

import pytest

from pmcontrols import Baseline, ProgressSnapshot


@pytest.fixture
def one_task_baseline() -> Baseline:
    """One task, budget 1000, spread linearly over periods 0..10."""
    return Baseline.from_doc(
        {
            "project_id": "P1",
            "tasks": [
                {
                    "task_id": "T1",
                    "budget": "1000",
                    "curve": [
                        {"t": 0, "cumulative": "0"},
                        {"t": 10, "cumulative": "1000"},
                    ],
                }
            ],
        }
    )


def snapshot(percent: str, actual: str, status=5, project_id="P1") -> ProgressSnapshot:
    return ProgressSnapshot.from_doc(
        {
            "project_id": project_id,
            "status_date": status,
            "entries": [
                {"task_id": "T1", "percent_complete": percent, "actual_cost": actual}
            ],
        }
    )
