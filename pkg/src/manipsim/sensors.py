"""Kinematic IMU model: angular velocity and acceleration of a frame plus white noise."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from manipsim.chain_model import ChainPlan, SensorGeometry
from manipsim.errors import ConfigError
from manipsim.kinematics import FrameState

STANDARD_GRAVITY = 9.80665
CHANNELS = ("wx", "wy", "wz", "ax", "ay", "az")


class Resolution(str, enum.Enum):
    BODY = "body"
    WORLD = "world"


class ImuSample(NamedTuple):
    wx: float
    wy: float
    wz: float
    ax: float
    ay: float
    az: float


ZERO_IMU = ImuSample(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class ImuConfig:
    """How frames are turned into readings.

    The default noise levels are placeholders, not calibrated values.
    """

    resolve_in: Resolution = Resolution.BODY
    include_gravity: bool = False
    gravity: tuple[float, float, float] = (0.0, 0.0, -STANDARD_GRAVITY)
    sigma_gyro: float = 2e-3
    sigma_accel: float = 2e-2
    rng_seed: int = 0

    def __post_init__(self):
        try:
            object.__setattr__(self, "resolve_in", Resolution(self.resolve_in))
        except ValueError:
            raise ConfigError(f"resolve_in must be 'body' or 'world', got {self.resolve_in!r}") from None
        object.__setattr__(self, "gravity", tuple(float(g) for g in self.gravity))
        if self.sigma_gyro < 0 or self.sigma_accel < 0:
            raise ConfigError("noise sigmas must be non-negative")
        if len(self.gravity) != 3 or not np.all(np.isfinite(self.gravity)):
            raise ConfigError(f"invalid gravity vector {self.gravity}")

    def to_dict(self) -> dict:
        return {
            "resolve_in": self.resolve_in.value,
            "include_gravity": self.include_gravity,
            "gravity": list(self.gravity),
            "sigma_gyro": self.sigma_gyro,
            "sigma_accel": self.sigma_accel,
            "rng_seed": self.rng_seed,
        }


def measure(s: FrameState, c: ImuConfig = ImuConfig()) -> ImuSample:
    acc = s.a - np.asarray(c.gravity) if c.include_gravity else s.a
    w = s.omega
    if c.resolve_in is Resolution.BODY:
        w = s.R.T @ w
        acc = s.R.T @ acc
    return ImuSample(*w.tolist(), *acc.tolist())


def noise_stream(c: ImuConfig, sensor_index: int) -> np.random.Generator:
    """Independent Gaussian stream for one sensor.

    Draws are consumed six per sample in time order, so the noise on sample
    ``k`` depends only on the seed, the sensor and ``k``.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([c.rng_seed, 0x1A1A, sensor_index])))


def add_noise(m: ImuSample, c: ImuConfig, stream: np.random.Generator) -> ImuSample:
    if c.sigma_gyro == 0 and c.sigma_accel == 0:
        return m
    z = stream.standard_normal(6).tolist()
    sg, sa = c.sigma_gyro, c.sigma_accel
    return ImuSample(
        m[0] + sg * z[0], m[1] + sg * z[1], m[2] + sg * z[2],
        m[3] + sa * z[3], m[4] + sa * z[4], m[5] + sa * z[5],
    )


@dataclass(frozen=True)
class SensorMount:
    name: str
    link: int
    role: str
    rotation: np.ndarray = field(compare=False)
    offset: np.ndarray = field(compare=False)


def place_sensors(plan: ChainPlan, geometry: SensorGeometry = SensorGeometry()) -> list[SensorMount]:
    """IMUs of ``plan`` in dataset column order with their mounting offsets."""
    mounts = []
    for name in plan.sensor_names:
        att = plan.attachments[name]
        Rc, pc = geometry.mount(att)
        mounts.append(SensorMount(name, att.link, att.role, Rc, pc))
    return mounts
