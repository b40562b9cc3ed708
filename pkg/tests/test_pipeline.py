"""Sequential pipeline execution, checkpointing, failure recovery, traces.

Fixture worlds are dyadic (see conftest), so trace aggregates are asserted
exactly: a failure-free run must reproduce its plan's totals bit-for-bit.
"""

import pytest

from relaydiff import (
    Budgets,
    ConfigurationError,
    FailureSpec,
    LineageError,
    RecoveryInfeasible,
    ValidationError,
    aggregate_latent_lineage,
    load_trace,
    save_trace,
    select_devices_dp,
    simulate_pipeline,
    trace_summary,
)
from relaydiff.pipeline import Event, trace_from_dict, trace_to_dict

from conftest import DYADIC_DISC


def checkpoints(trace):
    return [e for e in trace.events if e.kind == "checkpoint"]


def kinds(trace):
    return [e.kind for e in trace.events]


def assert_sequential(trace):
    for prev, nxt in zip(trace.events, trace.events[1:]):
        assert nxt.t_start_s == prev.t_end_s


def test_two_stage_run_matches_hand_sum(two_stage_scenario):
    plan = select_devices_dp(two_stage_scenario, Budgets(2.0, 200.0), DYADIC_DISC)
    assert plan.device_ids == (0, 1)
    trace = simulate_pipeline(two_stage_scenario, plan)
    # per stage (t_down, t_cmp, t_up) = (0.25, 0.5, 0.25)
    assert trace.t_total_s == 2.0
    assert trace.t_tran_s == 1.0
    assert trace.t_cmp_s == 1.0
    assert trace.tran_fraction == 0.5
    assert len(checkpoints(trace)) == 2
    assert trace.stages_completed == 2
    assert trace.replans == 0
    assert trace.completed and trace.feasible
    assert kinds(trace) == [
        "download", "compute", "upload", "checkpoint",
        "download", "compute", "upload", "checkpoint",
    ]
    assert_sequential(trace)


def test_failure_free_accounting_is_exact(three_device_scenario, fixture_budgets, fixture_disc):
    plan = select_devices_dp(three_device_scenario, fixture_budgets, fixture_disc)
    trace = simulate_pipeline(three_device_scenario, plan)
    assert trace.t_total_s == plan.t_total_s
    assert trace.e_total_j == plan.e_total_j
    assert trace.t_total_s == trace.t_tran_s + trace.t_cmp_s
    assert 0.0 <= trace.tran_fraction <= 1.0
    assert len(checkpoints(trace)) == plan.n_stages
    assert aggregate_latent_lineage(trace) == list(plan.device_ids)
    assert_sequential(trace)


def test_empty_plan_gives_empty_trace(three_device_scenario):
    plan = select_devices_dp(three_device_scenario, Budgets(0.0, 0.0))
    trace = simulate_pipeline(three_device_scenario, plan)
    assert trace.events == ()
    assert trace.t_total_s == 0.0 and trace.e_total_j == 0.0
    assert trace.tran_fraction == 0.0
    assert trace.stages_completed == 0
    assert trace.completed and trace.feasible
    assert aggregate_latent_lineage(trace) == []


def test_event_amounts_carry_bytes_and_steps(two_stage_scenario):
    plan = select_devices_dp(two_stage_scenario, Budgets(2.0, 200.0), DYADIC_DISC)
    trace = simulate_pipeline(two_stage_scenario, plan)
    for event in trace.events:
        if event.kind in ("download", "upload", "checkpoint"):
            assert event.amount == two_stage_scenario.latent_bytes
        elif event.kind == "compute":
            assert event.amount == two_stage_scenario.steps_per_stage


def test_compute_failure_recovers_on_spare(recovery_scenario, recovery_budgets):
    plan = select_devices_dp(recovery_scenario, recovery_budgets)
    assert plan.device_ids == (0, 1)
    trace = simulate_pipeline(
        recovery_scenario, plan, FailureSpec(injected=((1, "compute"),))
    )
    assert kinds(trace) == [
        "download", "compute", "upload", "checkpoint",   # stage 1 on device 0
        "download", "compute", "failure", "replan",      # device 1 dies mid-stage
        "download", "compute", "upload", "checkpoint",   # spare device 2 redoes it
    ]
    # the failed phase is still paid for: 1.0 + 0.75 lost + 0.5 on the spare
    assert trace.t_total_s == 2.25
    assert trace.e_total_j == 1.9375
    assert trace.stages_completed == 2
    assert trace.replans == 1
    assert trace.completed and trace.feasible
    assert aggregate_latent_lineage(trace) == [0, 2]
    failure = next(e for e in trace.events if e.kind == "failure")
    assert failure.device_id == 1
    assert failure.duration_s == 0.0
    assert_sequential(trace)


def test_upload_failure_reexecutes_stage_elsewhere(recovery_scenario, recovery_budgets):
    plan = select_devices_dp(recovery_scenario, recovery_budgets)
    trace = simulate_pipeline(
        recovery_scenario,
        plan,
        FailureSpec(injected=((1, "upload"),)),
        budgets=Budgets(2.75, 200.0),
    )
    # three upload events were paid for, but only two produced checkpoints
    assert sum(k == "upload" for k in kinds(trace)) == 3
    assert len(checkpoints(trace)) == 2
    assert trace.t_total_s == 2.5
    assert trace.stages_completed == 2
    assert aggregate_latent_lineage(trace) == [0, 2]


def test_infeasible_recovery_raises_with_partial_trace(recovery_scenario, recovery_budgets):
    plan = select_devices_dp(recovery_scenario, recovery_budgets)
    with pytest.raises(RecoveryInfeasible, match="no feasible continuation") as excinfo:
        simulate_pipeline(recovery_scenario, plan, FailureSpec(injected=((1, "upload"),)))
    trace = excinfo.value.trace
    assert trace is not None
    assert not trace.completed
    assert trace.stages_completed == 1
    assert trace.replans == 1
    assert len(checkpoints(trace)) == 1
    assert trace.t_total_s == 2.0  # all elapsed work is accounted for
    with pytest.raises(LineageError):
        aggregate_latent_lineage(trace)


def test_random_failures_are_deterministic(recovery_scenario, recovery_budgets):
    plan = select_devices_dp(recovery_scenario, recovery_budgets)
    spec = FailureSpec(per_stage_prob=0.5, rng_seed=3)

    def run():
        try:
            return simulate_pipeline(recovery_scenario, plan, spec)
        except RecoveryInfeasible as exc:
            return exc.trace

    assert run() == run()


def test_failure_spec_validation():
    with pytest.raises(ValidationError, match="phase"):
        FailureSpec(injected=((1, "explode"),))
    with pytest.raises(ValidationError, match="duplicate"):
        FailureSpec(injected=((1, "compute"), (1, "upload")))
    with pytest.raises(ValidationError, match="per_stage_prob"):
        FailureSpec(per_stage_prob=1.0)


def test_injected_failure_must_target_plan_device(recovery_scenario, recovery_budgets):
    plan = select_devices_dp(recovery_scenario, recovery_budgets)
    with pytest.raises(ConfigurationError, match="not in the plan"):
        simulate_pipeline(recovery_scenario, plan, FailureSpec(injected=((2, "compute"),)))


def test_event_validation():
    with pytest.raises(ValidationError, match="kind"):
        Event(0.0, 1.0, "teleport", 0, 0)
    with pytest.raises(ValidationError, match="precedes"):
        Event(1.0, 0.5, "compute", 0, 5)


def test_trace_roundtrip(tmp_path, recovery_scenario, recovery_budgets):
    plan = select_devices_dp(recovery_scenario, recovery_budgets)
    trace = simulate_pipeline(
        recovery_scenario, plan, FailureSpec(injected=((1, "compute"),))
    )
    path = tmp_path / "trace.json"
    save_trace(trace, path)
    assert load_trace(path) == trace


def test_trace_load_validation(recovery_scenario, recovery_budgets):
    plan = select_devices_dp(recovery_scenario, recovery_budgets)
    trace = simulate_pipeline(recovery_scenario, plan)

    def corrupted(mutate):
        data = trace_to_dict(trace)
        mutate(data)
        return data

    cases = [
        (lambda d: d.update(t_tran_s=1e9), r"trace.t_tran_s"),
        (lambda d: d["events"][0].update(kind="teleport"), r"kind"),
        (lambda d: d["events"][0].pop("amount"), r"amount"),
        (lambda d: d.update(stages_completed=-1), r"stages_completed"),
        (lambda d: d.update(completed="yes"), r"completed"),
    ]
    for mutate, pattern in cases:
        with pytest.raises(ValidationError, match=pattern):
            trace_from_dict(corrupted(mutate))


def test_trace_summary_is_flat(two_stage_scenario):
    plan = select_devices_dp(two_stage_scenario, Budgets(2.0, 200.0), DYADIC_DISC)
    summary = trace_summary(simulate_pipeline(two_stage_scenario, plan))
    assert summary == {
        "method": "dp",
        "stages_completed": 2,
        "replans": 0,
        "t_total_s": 2.0,
        "e_total_j": 1.75,
        "t_tran_s": 1.0,
        "t_cmp_s": 1.0,
        "tran_fraction": 0.5,
        "completed": True,
        "feasible": True,
    }
