"""Latency and energy costs of relayed diffusion stages.

Every stage on a device is three phases anchored at the edge server: download
the current latent, run K denoising steps locally, upload the result. Transfer
times come from a Shannon-rate link with power-law path loss (or per-device
rate overrides); energies are the matching power draw times phase duration.
The edge server's own consumption is out of scope and never charged.

Aggregation convention: totals over many cost terms use ``math.fsum`` and
``t_total`` is defined as ``t_tran + t_cmp``. Both choices make the accounting
identities exact in floating point (order-independent, no drift), so a plan's
predicted totals match a failure-free execution trace bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .errors import ConfigurationError
from .scenario import Device, LinkParams, Scenario

# Distances below one meter are clamped so the path-loss term stays bounded
# near the server.
MIN_DISTANCE_M = 1.0

BITS_PER_BYTE = 8.0


@dataclass(frozen=True)
class StageCost:
    """Phase latencies and energies of one stage on one device."""

    t_down_s: float
    t_cmp_s: float
    t_up_s: float
    e_down_j: float
    e_cmp_j: float
    e_up_j: float

    def t_total(self) -> float:
        return self.t_down_s + self.t_cmp_s + self.t_up_s

    def e_total(self) -> float:
        return self.e_down_j + self.e_cmp_j + self.e_up_j


@dataclass(frozen=True)
class CostTotals:
    """fsum-aggregated totals over a collection of stage costs."""

    t_tran_s: float
    t_cmp_s: float
    e_total_j: float

    @property
    def t_total_s(self) -> float:
        return self.t_tran_s + self.t_cmp_s


def aggregate_costs(costs: Iterable[StageCost]) -> CostTotals:
    """Exactly-rounded totals; the one accounting path plans and traces share."""

    costs = list(costs)
    t_tran = math.fsum([c.t_down_s for c in costs] + [c.t_up_s for c in costs])
    t_cmp = math.fsum(c.t_cmp_s for c in costs)
    e_total = math.fsum(
        [c.e_down_j for c in costs] + [c.e_cmp_j for c in costs] + [c.e_up_j for c in costs]
    )
    return CostTotals(t_tran_s=t_tran, t_cmp_s=t_cmp, e_total_j=e_total)


def link_rate(
    device: Device,
    link: LinkParams,
    direction: str,
    server_pos_m: tuple[float, float],
) -> float:
    """Achievable rate in bits/s between ``device`` and the server.

    ``direction`` is "up" (device to server) or "down" (server to device).
    A rate override for the device id takes precedence over the Shannon model.
    The device's transmit power sets the SNR for both directions, matching a
    symmetric-budget link; asymmetry is expressed through overrides.
    """

    if direction not in ("up", "down"):
        raise ConfigurationError(f"direction must be 'up' or 'down', got {direction!r}")
    if link.rate_override_bps is not None and device.id in link.rate_override_bps:
        up, down = link.rate_override_bps[device.id]
        return up if direction == "up" else down
    distance = max(math.dist(device.pos_m, server_pos_m), MIN_DISTANCE_M)
    gain = link.path_loss_ref_gain * distance ** -link.path_loss_exponent
    snr = device.tx_power_w * gain / link.noise_power_w
    return link.bandwidth_hz * math.log2(1.0 + snr)


def transfer_time(n_bytes: int, rate_bps: float) -> float:
    return BITS_PER_BYTE * n_bytes / rate_bps


def stage_cost(
    device: Device,
    link: LinkParams,
    latent_bytes: int,
    k_steps: int,
    server_pos_m: tuple[float, float],
) -> StageCost:
    """Cost of one K-step stage on ``device``: download, K steps, upload."""

    if k_steps < 0:
        raise ConfigurationError(f"k_steps must be >= 0, got {k_steps}")
    if latent_bytes < 0:
        raise ConfigurationError(f"latent_bytes must be >= 0, got {latent_bytes}")
    t_down = transfer_time(latent_bytes, link_rate(device, link, "down", server_pos_m))
    t_up = transfer_time(latent_bytes, link_rate(device, link, "up", server_pos_m))
    t_cmp = k_steps * device.step_latency_s
    return StageCost(
        t_down_s=t_down,
        t_cmp_s=t_cmp,
        t_up_s=t_up,
        e_down_j=device.rx_power_w * t_down,
        e_cmp_j=device.compute_power_w * t_cmp,
        e_up_j=device.tx_power_w * t_up,
    )


def stage_cost_for(scenario: Scenario, device: Device) -> StageCost:
    """Stage cost of ``device`` under the scenario's link, payload and K."""

    return stage_cost(
        device,
        scenario.link,
        scenario.latent_bytes,
        scenario.steps_per_stage,
        scenario.server_pos_m,
    )


@dataclass(frozen=True)
class SplitStepCost:
    """Costs of one split-inference denoising step across a device pair.

    Device A runs its share of the step, the activation features relay
    A -> server -> B, device B finishes the step, and the features relay back
    B -> server -> A for the next step. Per-device phase costs are stored as
    StageCost values: the "down" leg is what the device receives from the
    server and the "up" leg is what it sends.
    """

    cost_a: StageCost
    cost_b: StageCost

    @property
    def t_forward_s(self) -> float:
        """A -> server -> B feature relay latency."""

        return self.cost_a.t_up_s + self.cost_b.t_down_s

    @property
    def t_back_s(self) -> float:
        """B -> server -> A feature relay latency."""

        return self.cost_b.t_up_s + self.cost_a.t_down_s

    @property
    def t_tran_s(self) -> float:
        return self.t_forward_s + self.t_back_s

    @property
    def t_cmp_s(self) -> float:
        return self.cost_a.t_cmp_s + self.cost_b.t_cmp_s

    @property
    def t_step_s(self) -> float:
        return self.t_tran_s + self.t_cmp_s

    @property
    def e_a_j(self) -> float:
        return self.cost_a.e_total()

    @property
    def e_b_j(self) -> float:
        return self.cost_b.e_total()

    @property
    def e_step_j(self) -> float:
        return self.e_a_j + self.e_b_j


def split_step_cost(
    device_a: Device,
    device_b: Device,
    link: LinkParams,
    feature_bytes: int,
    split_fraction: float,
    server_pos_m: tuple[float, float],
) -> SplitStepCost:
    """Cost of one denoising step split across two devices at ``split_fraction``.

    A executes ``split_fraction`` of its per-step latency, B the complement of
    its own, and the intermediate features cross the server twice per step.
    """

    if device_a.id == device_b.id:
        raise ConfigurationError(f"split endpoints must differ, both are device {device_a.id}")
    if not 0.0 <= split_fraction <= 1.0:
        raise ConfigurationError(f"split_fraction must be in [0, 1], got {split_fraction}")

    t_a_up = transfer_time(feature_bytes, link_rate(device_a, link, "up", server_pos_m))
    t_a_down = transfer_time(feature_bytes, link_rate(device_a, link, "down", server_pos_m))
    t_b_up = transfer_time(feature_bytes, link_rate(device_b, link, "up", server_pos_m))
    t_b_down = transfer_time(feature_bytes, link_rate(device_b, link, "down", server_pos_m))
    t_a_cmp = split_fraction * device_a.step_latency_s
    t_b_cmp = (1.0 - split_fraction) * device_b.step_latency_s

    cost_a = StageCost(
        t_down_s=t_a_down,
        t_cmp_s=t_a_cmp,
        t_up_s=t_a_up,
        e_down_j=device_a.rx_power_w * t_a_down,
        e_cmp_j=device_a.compute_power_w * t_a_cmp,
        e_up_j=device_a.tx_power_w * t_a_up,
    )
    cost_b = StageCost(
        t_down_s=t_b_down,
        t_cmp_s=t_b_cmp,
        t_up_s=t_b_up,
        e_down_j=device_b.rx_power_w * t_b_down,
        e_cmp_j=device_b.compute_power_w * t_b_cmp,
        e_up_j=device_b.tx_power_w * t_b_up,
    )
    return SplitStepCost(cost_a=cost_a, cost_b=cost_b)
