"""Two-segment split-inference baseline.

Instead of handing whole stages to devices, every denoising step is split
across one fixed device pair: device A runs the front ``split_fraction`` of
the step, the intermediate activation features relay A -> server -> B, device
B finishes the step, and the features relay back for the next step. The
relayed payload is ``feature_bytes`` in both directions, so the baseline pays
two feature transfers on every single step where the stage pipeline pays two
latent transfers per K-step stage.

Each relayed transfer appears in the trace as one ``download`` event on the
receiving device whose duration spans both wireless legs; the sender's
transmit energy and the receiver's receive energy are both charged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .cost_model import split_step_cost
from .errors import ConfigurationError, ValidationError
from .pipeline import Event, SimTrace, _assemble_trace
from .scenario import Scenario
from .scheduler import Budgets


@dataclass(frozen=True)
class SplitConfig:
    """The device pair, split point and step count of a split run."""

    device_a_id: int
    device_b_id: int
    split_fraction: float = 0.5
    n_steps: int = 5

    def __post_init__(self):
        if self.device_a_id == self.device_b_id:
            raise ValidationError(
                f"split.device_b_id: must differ from device_a_id ({self.device_a_id})"
            )
        if not 0.0 <= self.split_fraction <= 1.0:
            raise ValidationError(
                f"split.split_fraction: must be in [0, 1], got {self.split_fraction!r}"
            )
        if not isinstance(self.n_steps, int) or self.n_steps < 1:
            raise ValidationError(f"split.n_steps: must be an integer >= 1, got {self.n_steps!r}")


def simulate_split(scenario: Scenario, config: SplitConfig, budgets: Budgets) -> SimTrace:
    """Run ``n_steps`` split denoising steps and return the trace.

    The run always executes fully; exceeding the budgets only clears the
    trace's ``feasible`` flag. ``stages_completed`` counts executed steps.
    """

    device_a = scenario.device(config.device_a_id)
    device_b = scenario.device(config.device_b_id)
    step = split_step_cost(
        device_a,
        device_b,
        scenario.link,
        scenario.feature_bytes,
        config.split_fraction,
        scenario.server_pos_m,
    )

    events: list[Event] = []
    transfer_durs: list[float] = []
    compute_durs: list[float] = []
    energy_terms: list[float] = []
    clock = 0.0

    def emit(kind: str, device_id: int, duration: float, energies: tuple[float, ...], amount: int):
        nonlocal clock
        start = clock
        clock = start + duration
        events.append(
            Event(t_start_s=start, t_end_s=clock, kind=kind, device_id=device_id, amount=amount)
        )
        if kind == "download":
            transfer_durs.append(duration)
        else:
            compute_durs.append(duration)
        energy_terms.extend(e for e in energies if e)

    a, b = step.cost_a, step.cost_b
    for _ in range(config.n_steps):
        emit("compute", device_a.id, a.t_cmp_s, (a.e_cmp_j,), 1)
        emit("download", device_b.id, step.t_forward_s, (a.e_up_j, b.e_down_j),
             scenario.feature_bytes)
        emit("compute", device_b.id, b.t_cmp_s, (b.e_cmp_j,), 1)
        emit("download", device_a.id, step.t_back_s, (b.e_up_j, a.e_down_j),
             scenario.feature_bytes)

    return _assemble_trace(
        events, transfer_durs, compute_durs, energy_terms,
        stages_completed=config.n_steps, replans=0, completed=True,
        budgets=budgets, method="split",
    )


def pick_split_pair(scenario: Scenario, n_steps: int | None = None) -> SplitConfig:
    """Lowest-latency ordered pair at an even split.

    Enumerates ordered pairs of available devices, scores each by per-step
    split latency (the step count scales all pairs alike), and returns the
    winner as a config; ties go to the lowest (a, b) id pair. ``n_steps``
    defaults to the scenario's steps per stage.
    """

    candidates = sorted(
        (dev for dev in scenario.devices if dev.available), key=lambda dev: dev.id
    )
    if len(candidates) < 2:
        raise ConfigurationError(
            f"split baseline needs at least 2 available devices, found {len(candidates)}"
        )
    steps = scenario.steps_per_stage if n_steps is None else n_steps
    best: SplitConfig | None = None
    best_latency = math.inf
    for device_a in candidates:
        for device_b in candidates:
            if device_a.id == device_b.id:
                continue
            step = split_step_cost(
                device_a, device_b, scenario.link, scenario.feature_bytes,
                0.5, scenario.server_pos_m,
            )
            if step.t_step_s < best_latency:
                best_latency = step.t_step_s
                best = SplitConfig(
                    device_a_id=device_a.id, device_b_id=device_b.id, n_steps=steps
                )
    assert best is not None
    return best
