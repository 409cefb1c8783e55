"""Random chain configurations and the run-mode lifecycle.

Draws come from numpy's PCG64 bit generator seeded through ``SeedSequence``;
only ``Generator.random`` (53-bit doubles) is used, whose stream numpy keeps
stable across platforms and releases.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, fields

import numpy as np

from manipsim.chain_model import DHTable, parse_dh_table
from manipsim.errors import InvalidRange, MissingInputs
from manipsim.trajectory import BaseOscTable, JointOscTable

log = logging.getLogger(__name__)

PRNG_ID = "numpy-PCG64-SeedSequence/random53"

HALF_PI = math.pi / 2


@dataclass(frozen=True)
class RandomRanges:
    a_range: tuple[float, float] = (0.8, 0.9)
    d_range: tuple[float, float] = (0.1, 0.3)
    angle_choices: tuple[float, ...] = (-HALF_PI, 0.0, HALF_PI)
    link_type_weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    revolute_amplitude: tuple[float, float] = (0.0, HALF_PI)
    prismatic_amplitude: tuple[float, float] = (0.0, 0.3)
    base_translation_amplitude: tuple[float, float] = (0.0, 0.3)
    base_rotation_amplitude: tuple[float, float] = (0.0, HALF_PI)
    frequency: tuple[float, float] = (0.1, 2.0)
    phase: tuple[float, float] = (0.0, 2 * math.pi)
    bias: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        for f in fields(self):
            val = tuple(float(x) for x in getattr(self, f.name))
            object.__setattr__(self, f.name, val)
            if not all(math.isfinite(x) for x in val):
                raise InvalidRange(f"{f.name} has non-finite entries")
            if f.name == "angle_choices":
                if not val:
                    raise InvalidRange("angle_choices is empty")
            elif f.name == "link_type_weights":
                if len(val) != 3 or min(val) < 0 or sum(val) <= 0:
                    raise InvalidRange(f"link_type_weights must be 3 non-negative weights with positive sum, got {val}")
            elif len(val) != 2 or val[0] > val[1]:
                raise InvalidRange(f"{f.name} must be (lower, upper) with lower <= upper, got {val}")
        if self.a_range[0] < 0 or self.d_range[0] < 0:
            raise InvalidRange("link lengths must be non-negative")
        if self.frequency[0] < 0:
            raise InvalidRange("frequencies must be non-negative")

    def to_dict(self) -> dict:
        return {f.name: list(getattr(self, f.name)) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> RandomRanges:
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InvalidRange(f"unknown range keys {sorted(unknown)}")
        return cls(**{k: tuple(v) for k, v in d.items()})


class Mode(enum.IntEnum):
    RANDOMIZE = 1
    FROM_INPUTS = 2


@dataclass(frozen=True)
class RunMode:
    mode: Mode = Mode.RANDOMIZE
    randomize_each_run: bool = False

    def __post_init__(self):
        try:
            object.__setattr__(self, "mode", Mode(int(self.mode)))
        except ValueError:
            raise InvalidRange(f"MODE must be 1 or 2, got {self.mode!r}") from None


class _Draw:
    def __init__(self, seed: int):
        self._rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))

    def uniform(self, bounds) -> float:
        lo, hi = bounds
        return lo + (hi - lo) * self._rng.random()

    def pick(self, choices):
        return choices[min(int(self._rng.random() * len(choices)), len(choices) - 1)]

    def weighted(self, weights) -> int:
        u = self._rng.random() * sum(weights)
        acc = 0.0
        for i, w in enumerate(weights):
            acc += w
            if u < acc:
                return i
        return max(i for i, w in enumerate(weights) if w > 0)


Config = tuple[DHTable, JointOscTable, BaseOscTable]


def randomize_config(seed: int, ranges: RandomRanges = RandomRanges()) -> Config:
    """Draw a DH table and both oscillation tables, fully determined by ``seed``."""
    g = _Draw(seed)
    dh = []
    for _ in range(8):
        alpha = g.pick(ranges.angle_choices)
        a = g.uniform(ranges.a_range)
        theta = g.pick(ranges.angle_choices)
        d = g.uniform(ranges.d_range)
        kind = g.weighted(ranges.link_type_weights)
        dh.append([alpha, a, theta, d, float(kind)])
    joints = []
    for _ in range(8):
        joints.append([
            g.uniform(ranges.revolute_amplitude),
            g.uniform(ranges.prismatic_amplitude),
            g.uniform(ranges.bias),
            g.uniform(ranges.frequency),
            g.uniform(ranges.phase),
        ])
    base = []
    for amp in (ranges.base_translation_amplitude, ranges.base_rotation_amplitude):
        base.append([g.uniform(amp), g.uniform(ranges.bias), g.uniform(ranges.frequency), g.uniform(ranges.phase)])
    return parse_dh_table(dh), JointOscTable(joints), BaseOscTable(base)


def resolve_inputs(
    mode: RunMode,
    dh=None,
    joints=None,
    base=None,
    seed: int = 0,
    ranges: RandomRanges = RandomRanges(),
) -> Config:
    """Pick the tables for a run: a fresh draw (MODE 1) or the provided ones (MODE 2)."""
    if mode.mode is Mode.RANDOMIZE:
        return randomize_config(seed, ranges)
    missing = [n for n, v in (("senSenDH", dh), ("senSenJ", joints), ("senSenB", base)) if v is None]
    if missing:
        raise MissingInputs(f"MODE 2 needs all three input tables; missing {', '.join(missing)}")
    if not mode.randomize_each_run:
        log.warning("randomization is turned off; using the provided input tables")
    dh = dh if isinstance(dh, DHTable) else parse_dh_table(dh)
    joints = joints if isinstance(joints, JointOscTable) else JointOscTable(joints)
    base = base if isinstance(base, BaseOscTable) else BaseOscTable(base)
    return dh, joints, base


def post_run_hook(
    mode: RunMode,
    seed: int,
    current: Config,
    ranges: RandomRanges = RandomRanges(),
) -> tuple[int, Config]:
    """Seed and tables for the next run: a redraw from ``seed + 1`` or unchanged."""
    if mode.randomize_each_run:
        nxt = seed + 1
        return nxt, randomize_config(nxt, ranges)
    return seed, current
