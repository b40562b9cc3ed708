"""Experiment worlds: devices, wireless link parameters, payload sizes.

A :class:`Scenario` is an immutable value object describing one deployment:
an area with an edge server, a fleet of heterogeneous devices each hosting a
quantized copy of the denoising model, the shared link model, and the payload
sizes moved per stage. Generation is fully seeded and the JSON serialization
round-trips losslessly, so every downstream result is reproducible from
(n_devices, area, seed, profile) alone.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, ValidationError

ALLOWED_BIT_WIDTHS = (32, 16, 8, 4)

TRANSFER_PHASES = ("download", "upload")
STAGE_PHASES = ("download", "compute", "upload")


@dataclass(frozen=True)
class ModelVariant:
    """One quantized copy of the denoising model.

    ``size_bytes`` is the quantity the device-selection objective adds up, so
    it is derived exactly from the parameter count and bit width rather than
    stored (files carry it redundantly and are checked on load).
    """

    bit_width: int
    param_count: int

    def __post_init__(self):
        if self.bit_width not in ALLOWED_BIT_WIDTHS:
            raise ValidationError(
                f"variant.bit_width: must be one of {ALLOWED_BIT_WIDTHS}, got {self.bit_width!r}"
            )
        if not isinstance(self.param_count, int) or self.param_count <= 0:
            raise ValidationError(
                f"variant.param_count: must be a positive integer, got {self.param_count!r}"
            )
        if (self.param_count * self.bit_width) % 8 != 0:
            raise ValidationError(
                "variant: param_count * bit_width must be a whole number of bytes"
            )

    @property
    def size_bytes(self) -> int:
        return self.param_count * self.bit_width // 8


@dataclass(frozen=True)
class Device:
    """A participant device: position, model copy, speed and power draws."""

    id: int
    pos_m: tuple[float, float]
    variant: ModelVariant
    step_latency_s: float
    compute_power_w: float
    tx_power_w: float
    rx_power_w: float
    available: bool = True

    def __post_init__(self):
        path = f"device(id={self.id!r})"
        if not isinstance(self.id, int) or isinstance(self.id, bool) or self.id < 0:
            raise ValidationError(f"{path}.id: must be a non-negative integer")
        if len(self.pos_m) != 2:
            raise ValidationError(f"{path}.pos_m: must be an (x, y) pair")
        object.__setattr__(self, "pos_m", (float(self.pos_m[0]), float(self.pos_m[1])))
        for name in ("step_latency_s", "compute_power_w", "tx_power_w", "rx_power_w"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ValidationError(f"{path}.{name}: must be finite and positive, got {value!r}")


@dataclass(frozen=True)
class LinkParams:
    """Shared wireless model between every device and the edge server.

    Rates follow a Shannon capacity with distance power-law path loss;
    ``rate_override_bps`` pins (uplink, downlink) rates for specific device
    ids and bypasses the geometry entirely for those devices.
    """

    bandwidth_hz: float
    noise_power_w: float
    path_loss_ref_gain: float
    path_loss_exponent: float = 3.0
    rate_override_bps: dict[int, tuple[float, float]] | None = None

    def __post_init__(self):
        for name in ("bandwidth_hz", "noise_power_w", "path_loss_ref_gain"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ValidationError(f"link.{name}: must be finite and positive, got {value!r}")
        if not self.path_loss_exponent >= 2.0:
            raise ValidationError(
                f"link.path_loss_exponent: must be >= 2, got {self.path_loss_exponent!r}"
            )
        if self.rate_override_bps is not None:
            for dev_id, pair in self.rate_override_bps.items():
                if len(pair) != 2 or not all(math.isfinite(r) and r > 0 for r in pair):
                    raise ValidationError(
                        f"link.rate_override_bps[{dev_id}]: must be a positive (up, down) pair"
                    )


@dataclass(frozen=True)
class Scenario:
    """One immutable experiment world."""

    area_m: tuple[float, float]
    server_pos_m: tuple[float, float]
    devices: tuple[Device, ...]
    link: LinkParams
    latent_bytes: int
    feature_bytes: int
    steps_per_stage: int
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "area_m", (float(self.area_m[0]), float(self.area_m[1])))
        object.__setattr__(
            self, "server_pos_m", (float(self.server_pos_m[0]), float(self.server_pos_m[1]))
        )
        object.__setattr__(self, "devices", tuple(self.devices))
        if not all(a > 0 and math.isfinite(a) for a in self.area_m):
            raise ValidationError(f"area_m: sides must be finite and positive, got {self.area_m!r}")
        if not isinstance(self.latent_bytes, int) or self.latent_bytes <= 0:
            raise ValidationError(f"latent_bytes: must be a positive integer, got {self.latent_bytes!r}")
        if not isinstance(self.feature_bytes, int) or self.feature_bytes < self.latent_bytes:
            raise ValidationError(
                f"feature_bytes: must be an integer >= latent_bytes ({self.latent_bytes}), "
                f"got {self.feature_bytes!r}"
            )
        if not isinstance(self.steps_per_stage, int) or self.steps_per_stage < 1:
            raise ValidationError(
                f"steps_per_stage: must be an integer >= 1, got {self.steps_per_stage!r}"
            )
        seen: dict[int, int] = {}
        for i, dev in enumerate(self.devices):
            if dev.id in seen:
                raise ValidationError(
                    f"devices[{i}].id: duplicate id {dev.id} (also devices[{seen[dev.id]}])"
                )
            seen[dev.id] = i
            x, y = dev.pos_m
            if not (0.0 <= x <= self.area_m[0] and 0.0 <= y <= self.area_m[1]):
                raise ValidationError(
                    f"devices[{i}].pos_m: {dev.pos_m} outside area {self.area_m}"
                )
        # ids must be dense from 0 so they double as stable array indices
        if set(seen) != set(range(len(self.devices))):
            raise ValidationError(
                f"devices: ids must cover 0..{len(self.devices) - 1} exactly, got {sorted(seen)}"
            )
        if self.link.rate_override_bps is not None:
            for dev_id in self.link.rate_override_bps:
                if dev_id not in seen:
                    raise ValidationError(
                        f"link.rate_override_bps[{dev_id}]: no such device id"
                    )

    def device(self, device_id: int) -> Device:
        for dev in self.devices:
            if dev.id == device_id:
                return dev
        raise ConfigurationError(f"no device with id {device_id}")

    def total_model_bytes(self) -> int:
        return sum(dev.variant.size_bytes for dev in self.devices)


@dataclass(frozen=True)
class DeviceClassProfile:
    """Per-hardware-class defaults; step latency is quoted for 32-bit models."""

    step_latency_32bit_s: float
    compute_power_w: float
    tx_power_w: float
    rx_power_w: float


@dataclass(frozen=True)
class ScenarioProfile:
    """Named bundle of generation defaults."""

    class_a: DeviceClassProfile
    class_b: DeviceClassProfile
    class_a_fraction: float
    param_count: int
    quantization_latency_exponent: float
    link: LinkParams
    latent_bytes: int
    feature_bytes: int
    steps_per_stage: int


# Two device classes modeled on embedded GPU boards a generation apart: class A
# runs a 32-bit denoising step in 120 ms, class B in 60 ms. Sub-linear latency
# scaling with bit width reflects that quantization saves less than its
# bandwidth ratio once non-GEMM overheads dominate.
PROFILES: dict[str, ScenarioProfile] = {
    "default": ScenarioProfile(
        class_a=DeviceClassProfile(
            step_latency_32bit_s=0.12, compute_power_w=20.0, tx_power_w=1.0, rx_power_w=0.5
        ),
        class_b=DeviceClassProfile(
            step_latency_32bit_s=0.06, compute_power_w=20.0, tx_power_w=1.0, rx_power_w=0.5
        ),
        class_a_fraction=0.5,
        param_count=1_000_000_000,
        quantization_latency_exponent=0.7,
        # 2 MHz / -130 dBW noise / -40 dB reference gain puts device SNRs in
        # the 14-30 dB range over a 500 m cell, i.e. latent transfers cost a
        # few hundred ms, the same order as a 5-step stage.
        link=LinkParams(
            bandwidth_hz=2e6,
            noise_power_w=1e-13,
            path_loss_ref_gain=1e-4,
            path_loss_exponent=3.0,
        ),
        latent_bytes=262144,
        feature_bytes=524288,
        steps_per_stage=5,
    )
}


def step_latency_for(profile_class: DeviceClassProfile, bit_width: int, exponent: float) -> float:
    """Denoising-step latency of a quantized variant on the given class."""

    return profile_class.step_latency_32bit_s * (bit_width / 32.0) ** exponent


def generate_scenario(
    n_devices: int,
    area_m: tuple[float, float] = (500.0, 500.0),
    seed: int = 0,
    profile: str = "default",
    class_a_fraction: float | None = None,
) -> Scenario:
    """Generate a seeded random scenario from a named profile.

    Devices are placed uniformly over the area with the server at its center.
    Each device independently draws a bit width (uniform over the allowed
    widths) and a hardware class (Bernoulli with ``class_a_fraction``).
    """

    if n_devices < 1:
        raise ConfigurationError(f"n_devices must be >= 1, got {n_devices}")
    if profile not in PROFILES:
        raise ConfigurationError(f"unknown profile {profile!r}, expected one of {sorted(PROFILES)}")
    prof = PROFILES[profile]
    frac = prof.class_a_fraction if class_a_fraction is None else float(class_a_fraction)
    if not 0.0 <= frac <= 1.0:
        raise ConfigurationError(f"class_a_fraction must be in [0, 1], got {frac}")

    width, height = float(area_m[0]), float(area_m[1])
    rng = np.random.default_rng(seed)
    devices = []
    for dev_id in range(n_devices):
        x = float(rng.uniform(0.0, width))
        y = float(rng.uniform(0.0, height))
        bit_width = ALLOWED_BIT_WIDTHS[int(rng.integers(0, len(ALLOWED_BIT_WIDTHS)))]
        klass = prof.class_a if rng.random() < frac else prof.class_b
        devices.append(
            Device(
                id=dev_id,
                pos_m=(x, y),
                variant=ModelVariant(bit_width=bit_width, param_count=prof.param_count),
                step_latency_s=step_latency_for(
                    klass, bit_width, prof.quantization_latency_exponent
                ),
                compute_power_w=klass.compute_power_w,
                tx_power_w=klass.tx_power_w,
                rx_power_w=klass.rx_power_w,
            )
        )
    return Scenario(
        area_m=(width, height),
        server_pos_m=(width / 2.0, height / 2.0),
        devices=tuple(devices),
        link=prof.link,
        latent_bytes=prof.latent_bytes,
        feature_bytes=prof.feature_bytes,
        steps_per_stage=prof.steps_per_stage,
        seed=int(seed),
    )


def mark_unavailable(scenario: Scenario, device_ids: set[int]) -> Scenario:
    """Copy of ``scenario`` with the given devices flagged unavailable."""

    return replace(
        scenario,
        devices=tuple(
            replace(dev, available=False) if dev.id in device_ids else dev
            for dev in scenario.devices
        ),
    )


# -- JSON serialization -------------------------------------------------------


def _require(obj: dict, key: str, kinds, path: str):
    if key not in obj:
        raise ValidationError(f"{path}.{key}: missing required field")
    value = obj[key]
    if kinds is bool:
        if not isinstance(value, bool):
            raise ValidationError(f"{path}.{key}: expected a boolean, got {value!r}")
    elif kinds is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(f"{path}.{key}: expected an integer, got {value!r}")
    elif kinds is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(f"{path}.{key}: expected a number, got {value!r}")
        value = float(value)
    elif not isinstance(value, kinds):
        raise ValidationError(f"{path}.{key}: expected {kinds}, got {type(value).__name__}")
    return value


def _pair_value(value, path: str) -> tuple[float, float]:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
    ):
        raise ValidationError(f"{path}: expected a pair of numbers, got {value!r}")
    return (float(value[0]), float(value[1]))


def _pair(obj: dict, key: str, path: str) -> tuple[float, float]:
    return _pair_value(_require(obj, key, (list, tuple), path), f"{path}.{key}")


def scenario_to_dict(scenario: Scenario) -> dict:
    link = scenario.link
    overrides = None
    if link.rate_override_bps is not None:
        overrides = {
            str(dev_id): [float(up), float(down)]
            for dev_id, (up, down) in sorted(link.rate_override_bps.items())
        }
    return {
        "area_m": list(scenario.area_m),
        "server_pos_m": list(scenario.server_pos_m),
        "devices": [
            {
                "id": dev.id,
                "pos_m": list(dev.pos_m),
                "variant": {
                    "bit_width": dev.variant.bit_width,
                    "param_count": dev.variant.param_count,
                    "size_bytes": dev.variant.size_bytes,
                },
                "step_latency_s": dev.step_latency_s,
                "compute_power_w": dev.compute_power_w,
                "tx_power_w": dev.tx_power_w,
                "rx_power_w": dev.rx_power_w,
                "available": dev.available,
            }
            for dev in scenario.devices
        ],
        "link": {
            "bandwidth_hz": link.bandwidth_hz,
            "noise_power_w": link.noise_power_w,
            "path_loss_ref_gain": link.path_loss_ref_gain,
            "path_loss_exponent": link.path_loss_exponent,
            "rate_override_bps": overrides,
        },
        "latent_bytes": scenario.latent_bytes,
        "feature_bytes": scenario.feature_bytes,
        "steps_per_stage": scenario.steps_per_stage,
        "seed": scenario.seed,
    }


def scenario_from_dict(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ValidationError(f"scenario: expected an object, got {type(data).__name__}")

    devices_raw = _require(data, "devices", list, "scenario")
    devices = []
    for i, dev_raw in enumerate(devices_raw):
        path = f"devices[{i}]"
        if not isinstance(dev_raw, dict):
            raise ValidationError(f"{path}: expected an object")
        variant_raw = _require(dev_raw, "variant", dict, path)
        variant = ModelVariant(
            bit_width=_require(variant_raw, "bit_width", int, f"{path}.variant"),
            param_count=_require(variant_raw, "param_count", int, f"{path}.variant"),
        )
        if "size_bytes" in variant_raw:
            stored = _require(variant_raw, "size_bytes", int, f"{path}.variant")
            if stored != variant.size_bytes:
                raise ValidationError(
                    f"{path}.variant.size_bytes: {stored} inconsistent with "
                    f"param_count * bit_width / 8 = {variant.size_bytes}"
                )
        devices.append(
            Device(
                id=_require(dev_raw, "id", int, path),
                pos_m=_pair(dev_raw, "pos_m", path),
                variant=variant,
                step_latency_s=_require(dev_raw, "step_latency_s", float, path),
                compute_power_w=_require(dev_raw, "compute_power_w", float, path),
                tx_power_w=_require(dev_raw, "tx_power_w", float, path),
                rx_power_w=_require(dev_raw, "rx_power_w", float, path),
                available=_require(dev_raw, "available", bool, path) if "available" in dev_raw else True,
            )
        )

    link_raw = _require(data, "link", dict, "scenario")
    overrides = None
    if link_raw.get("rate_override_bps") is not None:
        overrides_raw = _require(link_raw, "rate_override_bps", dict, "link")
        overrides = {}
        for key, pair in overrides_raw.items():
            try:
                dev_id = int(key)
            except (TypeError, ValueError):
                raise ValidationError(f"link.rate_override_bps: key {key!r} is not a device id")
            overrides[dev_id] = _pair_value(pair, f"link.rate_override_bps[{key}]")
    link = LinkParams(
        bandwidth_hz=_require(link_raw, "bandwidth_hz", float, "link"),
        noise_power_w=_require(link_raw, "noise_power_w", float, "link"),
        path_loss_ref_gain=_require(link_raw, "path_loss_ref_gain", float, "link"),
        path_loss_exponent=_require(link_raw, "path_loss_exponent", float, "link"),
        rate_override_bps=overrides,
    )

    return Scenario(
        area_m=_pair(data, "area_m", "scenario"),
        server_pos_m=_pair(data, "server_pos_m", "scenario"),
        devices=tuple(devices),
        link=link,
        latent_bytes=_require(data, "latent_bytes", int, "scenario"),
        feature_bytes=_require(data, "feature_bytes", int, "scenario"),
        steps_per_stage=_require(data, "steps_per_stage", int, "scenario"),
        seed=_require(data, "seed", int, "scenario"),
    )


def save_scenario(scenario: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=2, sort_keys=True) + "\n")


def load_scenario(path) -> Scenario:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    return scenario_from_dict(data)
