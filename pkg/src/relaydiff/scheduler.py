"""Device selection: maximize hosted model bytes under latency/energy budgets.

Each selected device runs exactly one relay stage, so a selection's cost is
the sum of its per-stage costs and its value is the sum of the selected
variants' byte sizes. Three methods share one plan type:

* :func:`select_devices_dp`: the production path. Exact stage costs are
  discretized (ceiling for costs, floor for capacities, so any plan that fits
  in units also fits exactly) and a knapsack-style table over
  (device prefix, time units, energy units) is filled by one of two
  interchangeable kernels: a compiled Cython loop or a vectorized numpy
  fallback, whichever imports (``DP_BACKEND`` says which). Backtracking
  prefers skipping a device when both choices tie. The DP result is finally
  compared against the greedy baseline and the better objective wins, which
  guarantees the method never loses to no-selection through rounding alone.
* :func:`select_devices_oracle`: exhaustive subset enumeration with exact
  float feasibility. Exponential; guarded to small fleets. Ties prefer fewer
  devices, then the lexicographically smallest id set.
* :func:`select_devices_no_ds`: no device selection. Admits devices in
  ascending id order while the running exact totals fit, stops at the first
  misfit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cost_model import StageCost, aggregate_costs, stage_cost_for
from .errors import ConfigurationError, ValidationError
from .scenario import Device, Scenario

try:
    from ._dp_core import fill_dp_table
    DP_BACKEND = "compiled"
except ImportError:  # pragma: no cover - exercised only without the extension
    from ._dp_numpy import fill_dp_table
    DP_BACKEND = "numpy"

METHODS = ("dp", "oracle", "no_ds")

# Default grid: budgets map to about 200 units per axis.
DEFAULT_GRID_UNITS = 200

# Refuse to allocate absurd DP tables instead of swapping the machine.
MAX_DP_CELLS = 200_000_000

ORACLE_MAX_DEVICES = 25


@dataclass(frozen=True)
class Budgets:
    """End-to-end latency and total energy caps for one image."""

    t_max_s: float
    e_max_j: float

    def __post_init__(self):
        for name in ("t_max_s", "e_max_j"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValidationError(f"budgets.{name}: must be finite and >= 0, got {value!r}")


@dataclass(frozen=True)
class Discretization:
    """Unit sizes used to integerize stage costs for the DP."""

    dt_s: float
    de_j: float

    def __post_init__(self):
        for name in ("dt_s", "de_j"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ValidationError(f"discretization.{name}: must be finite and > 0, got {value!r}")


def default_discretization(budgets: Budgets) -> Discretization:
    """Budget-proportional grid, about DEFAULT_GRID_UNITS units per axis."""

    dt = budgets.t_max_s / DEFAULT_GRID_UNITS if budgets.t_max_s > 0 else 1.0
    de = budgets.e_max_j / DEFAULT_GRID_UNITS if budgets.e_max_j > 0 else 1.0
    return Discretization(dt_s=dt, de_j=de)


def cost_units(value: float, unit: float) -> int:
    """ceil(value / unit), bumped so units * unit >= value holds in floats."""

    if value <= 0:
        return 0
    units = math.ceil(value / unit)
    while units * unit < value:
        units += 1
    return units


def capacity_units(budget: float, unit: float) -> int:
    """floor(budget / unit), bumped so units * unit <= budget holds in floats."""

    units = math.floor(budget / unit)
    while units > 0 and units * unit > budget:
        units -= 1
    return max(units, 0)


@dataclass(frozen=True)
class SchedulePlan:
    """An ordered stage assignment plus its predicted exact totals."""

    stages: tuple[tuple[int, StageCost], ...]
    objective_bytes: int
    t_total_s: float
    e_total_j: float
    budgets: Budgets
    method: str
    discretization: Discretization | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValidationError(f"plan.method: must be one of {METHODS}, got {self.method!r}")
        ids = [dev_id for dev_id, _ in self.stages]
        if ids != sorted(ids) or len(set(ids)) != len(ids):
            raise ValidationError(f"plan.stages: device ids must be strictly ascending, got {ids}")

    @property
    def device_ids(self) -> tuple[int, ...]:
        return tuple(dev_id for dev_id, _ in self.stages)

    @property
    def n_stages(self) -> int:
        return len(self.stages)


def _eligible(scenario: Scenario) -> tuple[list[Device], list[StageCost]]:
    devices = sorted(
        (dev for dev in scenario.devices if dev.available), key=lambda dev: dev.id
    )
    return devices, [stage_cost_for(scenario, dev) for dev in devices]


def _build_plan(
    devices: list[Device],
    costs: list[StageCost],
    picked: list[int],
    budgets: Budgets,
    method: str,
    discretization: Discretization | None,
) -> SchedulePlan:
    picked = sorted(picked)
    totals = aggregate_costs(costs[i] for i in picked)
    plan = SchedulePlan(
        stages=tuple((devices[i].id, costs[i]) for i in picked),
        objective_bytes=sum(devices[i].variant.size_bytes for i in picked),
        t_total_s=totals.t_total_s,
        e_total_j=totals.e_total_j,
        budgets=budgets,
        method=method,
        discretization=discretization,
    )
    if plan.t_total_s > budgets.t_max_s or plan.e_total_j > budgets.e_max_j:
        raise RuntimeError(
            f"internal error: {method} produced an infeasible plan "
            f"(t={plan.t_total_s}, e={plan.e_total_j}, budgets={budgets})"
        )
    return plan


def _greedy_indices(costs: list[StageCost], budgets: Budgets) -> list[int]:
    """Ascending-id admission on exact totals; stops at the first misfit."""

    admitted: list[int] = []
    for i, _ in enumerate(costs):
        trial = aggregate_costs(costs[j] for j in admitted + [i])
        if trial.t_total_s <= budgets.t_max_s and trial.e_total_j <= budgets.e_max_j:
            admitted.append(i)
        else:
            break
    return admitted


def select_devices_no_ds(scenario: Scenario, budgets: Budgets) -> SchedulePlan:
    """Baseline without device selection: first devices that happen to fit."""

    devices, costs = _eligible(scenario)
    picked = _greedy_indices(costs, budgets)
    return _build_plan(devices, costs, picked, budgets, "no_ds", None)


def select_devices_dp(
    scenario: Scenario,
    budgets: Budgets,
    discretization: Discretization | None = None,
) -> SchedulePlan:
    """Constraint-discretized DP selection (see module docstring)."""

    disc = default_discretization(budgets) if discretization is None else discretization
    devices, costs = _eligible(scenario)
    n = len(devices)

    unit_t = np.array([cost_units(c.t_total(), disc.dt_s) for c in costs], dtype=np.int64)
    unit_e = np.array([cost_units(c.e_total(), disc.de_j) for c in costs], dtype=np.int64)
    sizes = np.array([dev.variant.size_bytes for dev in devices], dtype=np.int64)
    cap_t = capacity_units(budgets.t_max_s, disc.dt_s)
    cap_e = capacity_units(budgets.e_max_j, disc.de_j)

    cells = (n + 1) * (cap_t + 1) * (cap_e + 1)
    if cells > MAX_DP_CELLS:
        raise ConfigurationError(
            f"DP table would need {cells} cells; coarsen the discretization "
            f"(dt_s={disc.dt_s}, de_j={disc.de_j})"
        )

    table = fill_dp_table(unit_t, unit_e, sizes, cap_t, cap_e)

    # Backtrack from the full-capacity corner; ties keep the device skipped.
    picked: list[int] = []
    t, e = cap_t, cap_e
    for j in range(n, 0, -1):
        if table[j, t, e] != table[j - 1, t, e]:
            picked.append(j - 1)
            t -= int(unit_t[j - 1])
            e -= int(unit_e[j - 1])
    picked.reverse()

    # Rounding can exclude subsets that fit exactly; never do worse than the
    # no-selection baseline on the exact problem.
    greedy = _greedy_indices(costs, budgets)
    if sum(sizes[i] for i in greedy) > sum(sizes[i] for i in picked):
        picked = greedy

    return _build_plan(devices, costs, picked, budgets, "dp", disc)


def select_devices_oracle(scenario: Scenario, budgets: Budgets) -> SchedulePlan:
    """Exhaustive optimum over all subsets, exact float feasibility.

    Intended as ground truth for small fleets; cost grows as 2^n. Among
    maximum-objective subsets the oracle returns the one with fewest devices,
    breaking remaining ties by lexicographically smallest id tuple.
    """

    devices, costs = _eligible(scenario)
    n = len(devices)
    if n > ORACLE_MAX_DEVICES:
        raise ConfigurationError(
            f"oracle enumeration over {n} devices exceeds the {ORACLE_MAX_DEVICES}-device guard"
        )

    t_one = [c.t_total() for c in costs]
    e_one = [c.e_total() for c in costs]
    size_one = [dev.variant.size_bytes for dev in devices]
    ids = [dev.id for dev in devices]

    n_masks = 1 << n
    t_sum = [0.0] * n_masks
    e_sum = [0.0] * n_masks
    objective = [0] * n_masks

    def id_tuple(mask: int) -> tuple[int, ...]:
        return tuple(ids[i] for i in range(n) if mask >> i & 1)

    best = 0  # the empty subset is always feasible
    for mask in range(1, n_masks):
        low = mask & -mask
        i = low.bit_length() - 1
        rest = mask ^ low
        t_sum[mask] = t_sum[rest] + t_one[i]
        e_sum[mask] = e_sum[rest] + e_one[i]
        objective[mask] = objective[rest] + size_one[i]
        if t_sum[mask] > budgets.t_max_s or e_sum[mask] > budgets.e_max_j:
            continue
        if objective[mask] > objective[best]:
            best = mask
        elif objective[mask] == objective[best]:
            if mask.bit_count() < best.bit_count() or (
                mask.bit_count() == best.bit_count() and id_tuple(mask) < id_tuple(best)
            ):
                best = mask

    picked = [i for i in range(n) if best >> i & 1]
    return _build_plan(devices, costs, picked, budgets, "oracle", None)


# -- plan files ----------------------------------------------------------------

_STAGE_FIELDS = ("t_down_s", "t_cmp_s", "t_up_s", "e_down_j", "e_cmp_j", "e_up_j")


def plan_to_dict(plan: SchedulePlan) -> dict:
    disc = plan.discretization
    return {
        "method": plan.method,
        "budgets": {"t_max_s": plan.budgets.t_max_s, "e_max_j": plan.budgets.e_max_j},
        "discretization": None if disc is None else {"dt_s": disc.dt_s, "de_j": disc.de_j},
        "stages": [
            {"device_id": dev_id, **{f: getattr(cost, f) for f in _STAGE_FIELDS}}
            for dev_id, cost in plan.stages
        ],
        "objective_bytes": plan.objective_bytes,
        "t_total_s": plan.t_total_s,
        "e_total_j": plan.e_total_j,
    }


def plan_from_dict(data: dict) -> SchedulePlan:
    if not isinstance(data, dict):
        raise ValidationError(f"plan: expected an object, got {type(data).__name__}")
    method = data.get("method")
    if method not in METHODS:
        raise ValidationError(f"plan.method: must be one of {METHODS}, got {method!r}")

    budgets_raw = data.get("budgets")
    if not isinstance(budgets_raw, dict):
        raise ValidationError("plan.budgets: expected an object")
    budgets = Budgets(
        t_max_s=float(budgets_raw.get("t_max_s", float("nan"))),
        e_max_j=float(budgets_raw.get("e_max_j", float("nan"))),
    )

    disc = None
    if data.get("discretization") is not None:
        disc_raw = data["discretization"]
        if not isinstance(disc_raw, dict):
            raise ValidationError("plan.discretization: expected an object or null")
        disc = Discretization(
            dt_s=float(disc_raw.get("dt_s", float("nan"))),
            de_j=float(disc_raw.get("de_j", float("nan"))),
        )

    stages_raw = data.get("stages")
    if not isinstance(stages_raw, list):
        raise ValidationError("plan.stages: expected a list")
    stages = []
    for i, stage_raw in enumerate(stages_raw):
        path = f"plan.stages[{i}]"
        if not isinstance(stage_raw, dict):
            raise ValidationError(f"{path}: expected an object")
        if "device_id" not in stage_raw or isinstance(stage_raw["device_id"], bool) or not isinstance(stage_raw["device_id"], int):
            raise ValidationError(f"{path}.device_id: expected an integer")
        fields = {}
        for name in _STAGE_FIELDS:
            value = stage_raw.get(name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or value < 0:
                raise ValidationError(f"{path}.{name}: expected a number >= 0, got {value!r}")
            fields[name] = float(value)
        stages.append((stage_raw["device_id"], StageCost(**fields)))

    objective = data.get("objective_bytes")
    if isinstance(objective, bool) or not isinstance(objective, int) or objective < 0:
        raise ValidationError(f"plan.objective_bytes: expected an integer >= 0, got {objective!r}")

    totals = aggregate_costs(cost for _, cost in stages)
    for name, stored, recomputed in (
        ("t_total_s", data.get("t_total_s"), totals.t_total_s),
        ("e_total_j", data.get("e_total_j"), totals.e_total_j),
    ):
        if isinstance(stored, bool) or not isinstance(stored, (int, float)):
            raise ValidationError(f"plan.{name}: expected a number, got {stored!r}")
        if not math.isclose(float(stored), recomputed, rel_tol=1e-12, abs_tol=1e-12):
            raise ValidationError(
                f"plan.{name}: {stored} inconsistent with stage costs ({recomputed})"
            )

    return SchedulePlan(
        stages=tuple(stages),
        objective_bytes=objective,
        t_total_s=totals.t_total_s,
        e_total_j=totals.e_total_j,
        budgets=budgets,
        method=method,
        discretization=disc,
    )


def save_plan(plan: SchedulePlan, path) -> None:
    Path(path).write_text(json.dumps(plan_to_dict(plan), indent=2, sort_keys=True) + "\n")


def load_plan(path) -> SchedulePlan:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    return plan_from_dict(data)
