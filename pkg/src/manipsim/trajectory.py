"""Sine-wave motion signals for the joints and the floating base.

Every signal is ``A*sin(w*t + phase) + bias`` with ``w`` in rad/s and the
phase an additive angle in radians. The first two time derivatives are
evaluated analytically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from manipsim.chain_model import LinkType
from manipsim.errors import DimensionError, NonFiniteValue


class MotionSample(NamedTuple):
    q: float
    qd: float
    qdd: float


ZERO_MOTION = MotionSample(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class SineParams:
    amplitude: float = 0.0
    bias: float = 0.0
    frequency: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        vals = (self.amplitude, self.bias, self.frequency, self.phase)
        if not all(np.isfinite(vals)):
            raise NonFiniteValue(f"non-finite sine parameters {vals}")
        if self.frequency < 0:
            raise NonFiniteValue(f"negative frequency {self.frequency}")


def eval_sine(p: SineParams, t: float) -> MotionSample:
    arg = p.frequency * t + p.phase
    s, c = math.sin(arg), math.cos(arg)
    A, w = p.amplitude, p.frequency
    return MotionSample(A * s + p.bias, A * w * c, -A * w * w * s)


def _checked(raw, shape, name) -> np.ndarray:
    arr = np.asarray(raw, dtype=float)
    if arr.shape not in shape:
        raise DimensionError(f"{name} must have shape {' or '.join(map(str, shape))}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValue(f"{name} contains non-finite values")
    if np.any(arr[:, -2] < 0):
        raise NonFiniteValue(f"{name} has a negative frequency")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


class JointOscTable:
    """8x5 joint table: amplitude, prismatic amplitude, bias, frequency, phase.

    Rows 1-6 drive the modular links; rows 7-8 are carried along unused.
    """

    def __init__(self, raw):
        self.values = _checked(raw, [(8, 5)], "joint oscillation table")
        self._params = {}
        for i, (amp, prism_amp, bias, freq, phase) in enumerate(self.values.tolist(), start=1):
            self._params[i, LinkType.REVOLUTE] = SineParams(amp, bias, freq, phase)
            self._params[i, LinkType.PRISMATIC] = SineParams(prism_amp, bias, freq, phase)

    def params(self, link_index: int, kind: LinkType) -> SineParams:
        return self._params[link_index, kind]

    def as_array(self) -> np.ndarray:
        return np.array(self.values)

    def __eq__(self, other):
        return isinstance(other, JointOscTable) and np.array_equal(self.values, other.values)


class BaseOscTable:
    """Base table: amplitude, bias, frequency, phase.

    The 2x4 form holds one translation row and one rotation row, each shared
    by all three axes. A 6x4 form gives tx, ty, tz, rx, ry, rz individually.
    """

    def __init__(self, raw):
        self.values = _checked(raw, [(2, 4), (6, 4)], "base oscillation table")
        rows = self.values.tolist()
        if len(rows) == 2:
            rows = [rows[0]] * 3 + [rows[1]] * 3
        self._params = [SineParams(*r) for r in rows]

    def axis_params(self, axis: int) -> SineParams:
        """Parameters for axis 0-5 (tx, ty, tz, rx, ry, rz)."""
        return self._params[axis]

    def as_array(self) -> np.ndarray:
        return np.array(self.values)

    def __eq__(self, other):
        return isinstance(other, BaseOscTable) and np.array_equal(self.values, other.values)


def joint_motion(tbl: JointOscTable, link_index: int, kind: LinkType, t: float) -> MotionSample:
    if not 1 <= link_index <= 6:
        raise IndexError(f"joint index {link_index} outside 1..6")
    if kind is LinkType.EMPTY:
        return ZERO_MOTION
    return eval_sine(tbl.params(link_index, kind), t)


def base_motion(tbl: BaseOscTable, t: float) -> list[MotionSample]:
    """Samples for tx, ty, tz, rx, ry, rz."""
    return [eval_sine(tbl.axis_params(i), t) for i in range(6)]
