from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pmcontrols import (
    Baseline,
    EventKind,
    Gate,
    LifecycleEvent,
    Outcome,
    ProgressSnapshot,
    ProjectPhase,
    advance,
    allowed_events,
)
from pmcontrols.errors import (
    IllegalTransition,
    NoBaseline,
    PhaseViolation,
    TerminalState,
    UnknownTask,
    ValidationFailed,
)
from pmcontrols.lifecycle import (
    TERMINAL_PHASES,
    new_record,
    progress_warnings,
    with_baseline,
    with_snapshot,
)
from pmcontrols.money import TimePoint

from helpers import DECLARED_TRANSITIONS, record_in_phase


def ev(kind, outcome=None, role="business_manager", at=1):
    return LifecycleEvent(kind=kind, role=role, at=TimePoint.parse(at), outcome=outcome)


def all_event_shapes():
    """Every event-kind/outcome combination that constructs a valid event."""
    shapes = []
    for kind in EventKind:
        if kind in (EventKind.DECISION_BID_NO_BID, EventKind.DECISION_WIN_LOSS):
            shapes.append((kind, Outcome.GO))
            shapes.append((kind, Outcome.NO_GO))
        else:
            shapes.append((kind, None))
    return shapes


def fixture_states():
    """(record, win/loss-go flag) pairs covering every reachable situation."""
    states = [
        (record_in_phase(ProjectPhase.OPPORTUNITY), False),
        (record_in_phase(ProjectPhase.PROPOSAL_PREPARATION), False),
        (record_in_phase(ProjectPhase.NEGOTIATION, with_win_go=False), False),
        (record_in_phase(ProjectPhase.NEGOTIATION, with_win_go=True), True),
        (record_in_phase(ProjectPhase.IMPLEMENTATION), True),
        (record_in_phase(ProjectPhase.DELIVERED), True),
        (record_in_phase(ProjectPhase.CLOSED), True),
        (record_in_phase(ProjectPhase.ABANDONED), False),
    ]
    return states


# ── exhaustive conformance to the declared table ─────────────────────


def test_every_phase_event_pair_matches_declared_table_or_errors():
    checked = 0
    for record, has_go in fixture_states():
        for kind, outcome in all_event_shapes():
            key = (record.phase, kind, outcome, has_go)
            event = ev(kind, outcome)
            if record.phase in TERMINAL_PHASES:
                with pytest.raises(TerminalState):
                    advance(record, event)
            elif key in DECLARED_TRANSITIONS:
                assert advance(record, event).phase is DECLARED_TRANSITIONS[key]
            else:
                with pytest.raises(IllegalTransition):
                    advance(record, event)
            checked += 1
    # 8 situations x 12 event shapes
    assert checked == 96


def test_allowed_events_equals_successful_advances():
    for record, _ in fixture_states():
        accepted = set()
        for kind, outcome in all_event_shapes():
            try:
                advance(record, ev(kind, outcome))
                accepted.add(kind)
            except (IllegalTransition, TerminalState):
                pass
        assert allowed_events(record) == accepted


# ── gate specifics ───────────────────────────────────────────────────


def test_no_bid_abandons():
    record = record_in_phase(ProjectPhase.PROPOSAL_PREPARATION)
    after = advance(record, ev(EventKind.DECISION_BID_NO_BID, Outcome.NO_GO))
    assert after.phase is ProjectPhase.ABANDONED


def test_win_decision_keeps_negotiating_until_signature():
    record = record_in_phase(ProjectPhase.NEGOTIATION)
    won = advance(record, ev(EventKind.DECISION_WIN_LOSS, Outcome.GO))
    assert won.phase is ProjectPhase.NEGOTIATION
    signed = advance(won, ev(EventKind.CONTRACT_SIGNED, role="customer"))
    assert signed.phase is ProjectPhase.IMPLEMENTATION


def test_contract_signature_requires_prior_win():
    record = record_in_phase(ProjectPhase.NEGOTIATION)
    with pytest.raises(IllegalTransition):
        advance(record, ev(EventKind.CONTRACT_SIGNED))


def test_win_loss_cannot_be_redecided():
    record = record_in_phase(ProjectPhase.NEGOTIATION, with_win_go=True)
    for outcome in (Outcome.GO, Outcome.NO_GO):
        with pytest.raises(IllegalTransition):
            advance(record, ev(EventKind.DECISION_WIN_LOSS, outcome))
    assert allowed_events(record) == {EventKind.CONTRACT_SIGNED}


def test_terminal_phases_absorb_everything():
    for phase in (ProjectPhase.CLOSED, ProjectPhase.ABANDONED):
        record = record_in_phase(phase)
        assert allowed_events(record) == frozenset()
        with pytest.raises(TerminalState):
            advance(record, ev(EventKind.OPPORTUNITY_QUALIFIED))


def test_proposal_ready_has_no_edge_anywhere():
    # The event kind exists but the transition table defines no edge for it.
    for record, _ in fixture_states():
        if record.phase in TERMINAL_PHASES:
            continue
        with pytest.raises(IllegalTransition):
            advance(record, ev(EventKind.PROPOSAL_READY, role="before_sale_engineer"))


def test_gate_decisions_extracted_in_order():
    record = record_in_phase(ProjectPhase.IMPLEMENTATION)
    decisions = record.gate_decisions()
    assert [d.gate for d in decisions] == [Gate.BID_NO_BID, Gate.WIN_LOSS]
    assert all(d.outcome is Outcome.GO for d in decisions)
    assert decisions[0].decided_by == "business_manager"


# ── history discipline ───────────────────────────────────────────────


def test_history_is_append_only():
    record = record_in_phase(ProjectPhase.NEGOTIATION)
    before = record.history
    after = advance(record, ev(EventKind.DECISION_WIN_LOSS, Outcome.GO, at=5))
    assert after.history[: len(before)] == before
    assert len(after.history) == len(before) + 1
    assert record.history == before  # the input record is untouched


def test_history_timestamps_must_not_regress():
    record = record_in_phase(ProjectPhase.NEGOTIATION)
    with pytest.raises(ValidationFailed):
        advance(record, ev(EventKind.DECISION_WIN_LOSS, Outcome.GO, at=-1))
    # equal timestamps are fine
    advance(record, ev(EventKind.DECISION_WIN_LOSS, Outcome.GO, at=0))


def test_decision_outcome_shape_enforced():
    with pytest.raises(ValidationFailed):
        LifecycleEvent(
            kind=EventKind.DECISION_BID_NO_BID, role="business_manager", at=TimePoint.parse(0)
        )
    with pytest.raises(ValidationFailed):
        LifecycleEvent(
            kind=EventKind.CONTRACT_SIGNED,
            role="legal_support",
            at=TimePoint.parse(0),
            outcome=Outcome.GO,
        )


@given(choices=st.lists(st.integers(min_value=0, max_value=11), max_size=24))
@settings(max_examples=200)
def test_random_walks_reach_implementation_only_through_both_gates(choices):
    shapes = all_event_shapes()
    record = new_record("P1")
    clock = 0
    for choice in choices:
        kind, outcome = shapes[choice]
        clock += 1
        try:
            record = advance(record, ev(kind, outcome, at=clock))
        except (IllegalTransition, TerminalState, ValidationFailed):
            continue
        if record.phase is ProjectPhase.IMPLEMENTATION:
            kinds = [e.kind for e in record.history]
            bid = kinds.index(EventKind.DECISION_BID_NO_BID)
            win = kinds.index(EventKind.DECISION_WIN_LOSS)
            signed = kinds.index(EventKind.CONTRACT_SIGNED)
            assert bid < win < signed
            assert record.history[bid].outcome is Outcome.GO
            assert record.history[win].outcome is Outcome.GO


# ── baseline and snapshot attachment rules ───────────────────────────

BASELINE_DOC = {
    "project_id": "P1",
    "tasks": [
        {"task_id": "T1", "budget": "1000", "curve": [{"t": 0, "cumulative": "0"}, {"t": 10, "cumulative": "1000"}]}
    ],
}


def snapshot_doc(status=1, task="T1", pc="0.1", ac="50"):
    return {
        "project_id": "P1",
        "status_date": status,
        "entries": [{"task_id": task, "percent_complete": pc, "actual_cost": ac}],
    }


def test_snapshot_requires_implementation_phase():
    record = record_in_phase(ProjectPhase.NEGOTIATION)
    record = with_baseline(record, Baseline.from_doc(BASELINE_DOC))
    with pytest.raises(PhaseViolation):
        with_snapshot(record, ProgressSnapshot.from_doc(snapshot_doc()))


def test_snapshot_requires_baseline():
    record = record_in_phase(ProjectPhase.IMPLEMENTATION)
    with pytest.raises(NoBaseline):
        with_snapshot(record, ProgressSnapshot.from_doc(snapshot_doc()))


def test_snapshot_rejects_unknown_tasks():
    record = with_baseline(
        record_in_phase(ProjectPhase.IMPLEMENTATION), Baseline.from_doc(BASELINE_DOC)
    )
    with pytest.raises(UnknownTask):
        with_snapshot(record, ProgressSnapshot.from_doc(snapshot_doc(task="NOPE")))


def test_snapshot_status_dates_must_advance():
    record = with_baseline(
        record_in_phase(ProjectPhase.IMPLEMENTATION), Baseline.from_doc(BASELINE_DOC)
    )
    record = with_snapshot(record, ProgressSnapshot.from_doc(snapshot_doc(status=3)))
    with pytest.raises(ValidationFailed):
        with_snapshot(record, ProgressSnapshot.from_doc(snapshot_doc(status=3)))
    with pytest.raises(ValidationFailed):
        with_snapshot(record, ProgressSnapshot.from_doc(snapshot_doc(status=2)))
    with_snapshot(record, ProgressSnapshot.from_doc(snapshot_doc(status=4)))


def test_baseline_locked_after_first_snapshot():
    record = with_baseline(
        record_in_phase(ProjectPhase.IMPLEMENTATION), Baseline.from_doc(BASELINE_DOC)
    )
    record = with_snapshot(record, ProgressSnapshot.from_doc(snapshot_doc()))
    with pytest.raises(PhaseViolation):
        with_baseline(record, Baseline.from_doc(BASELINE_DOC))
    rebased = with_baseline(record, Baseline.from_doc(BASELINE_DOC), rebaseline=True)
    assert len(rebased.archived_baselines) == 1


def test_baseline_refused_after_delivery():
    record = record_in_phase(ProjectPhase.DELIVERED)
    with pytest.raises(PhaseViolation):
        with_baseline(record, Baseline.from_doc(BASELINE_DOC))


def test_baseline_project_id_must_match():
    record = record_in_phase(ProjectPhase.IMPLEMENTATION)
    foreign = Baseline.from_doc({**BASELINE_DOC, "project_id": "OTHER"})
    with pytest.raises(ValidationFailed):
        with_baseline(record, foreign)


def test_progress_regression_warns_but_is_legal():
    record = with_baseline(
        record_in_phase(ProjectPhase.IMPLEMENTATION), Baseline.from_doc(BASELINE_DOC)
    )
    record = with_snapshot(record, ProgressSnapshot.from_doc(snapshot_doc(status=1, pc="0.5")))
    lower = ProgressSnapshot.from_doc(snapshot_doc(status=2, pc="0.4"))
    warnings = progress_warnings(record, lower)
    assert len(warnings) == 1 and "T1" in warnings[0]
    with_snapshot(record, lower)  # accepted despite the warning
