"""World-resolved pose, velocity and acceleration propagation along a chain.

:func:`evaluate_chain` walks a :class:`~manipsim.chain_model.ChainPlan`
outward from the world frame, carrying a :class:`FrameState` through every
elementary step. :func:`fk_pose` and :func:`finite_difference_oracle` are a
separate, pose-only path used to check it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from manipsim.chain_model import ChainPlan, SensorGeometry, TransformKind
from manipsim.errors import MissingJointValue
from manipsim.trajectory import (
    BaseOscTable,
    JointOscTable,
    MotionSample,
    base_motion,
    joint_motion,
)

_ZERO = np.zeros(3)


def _cross(u, v):
    # np.cross carries too much overhead for single 3-vectors
    u0, u1, u2 = u.tolist()
    v0, v1, v2 = v.tolist()
    return np.array([u1 * v2 - u2 * v1, u2 * v0 - u0 * v2, u0 * v1 - u1 * v0])


@dataclass(frozen=True)
class Pose:
    R: np.ndarray
    p: np.ndarray

    def as_matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = self.R
        T[:3, 3] = self.p
        return T


@dataclass(frozen=True)
class FrameState:
    """Frame axes ``R`` and every vector expressed in world coordinates."""

    R: np.ndarray
    p: np.ndarray
    omega: np.ndarray
    v: np.ndarray
    alpha: np.ndarray
    a: np.ndarray

    @classmethod
    def identity(cls) -> FrameState:
        return cls(np.eye(3), _ZERO, _ZERO, _ZERO, _ZERO, _ZERO)

    @property
    def pose(self) -> Pose:
        return Pose(self.R, self.p)


def propagate_const(s: FrameState, Rc, pc) -> FrameState:
    """Carry a state across a rigid offset ``pc`` (in the current frame) and rotation ``Rc``."""
    r = s.R @ pc
    w_x_r = _cross(s.omega, r)
    return FrameState(
        R=s.R @ Rc,
        p=s.p + r,
        omega=s.omega,
        v=s.v + w_x_r,
        alpha=s.alpha,
        a=s.a + _cross(s.alpha, r) + _cross(s.omega, w_x_r),
    )


def propagate_revolute(s: FrameState, m: MotionSample, axis: int = 2) -> FrameState:
    """Rotate about the current frame's ``axis`` (default z) by the joint motion."""
    z = s.R[:, axis]
    w_rel = m.qd * z
    return FrameState(
        R=s.R @ _axis_rotation(axis, m.q),
        p=s.p,
        omega=s.omega + w_rel,
        v=s.v,
        alpha=s.alpha + m.qdd * z + _cross(s.omega, w_rel),
        a=s.a,
    )


def propagate_prismatic(s: FrameState, m: MotionSample, axis: int = 2) -> FrameState:
    """Slide along the current frame's ``axis`` (default z) by the joint motion."""
    z = s.R[:, axis]
    r = m.q * z
    v_rel = m.qd * z
    w_x_r = _cross(s.omega, r)
    return FrameState(
        R=s.R,
        p=s.p + r,
        omega=s.omega,
        v=s.v + v_rel + w_x_r,
        alpha=s.alpha,
        a=(s.a + m.qdd * z + 2.0 * _cross(s.omega, v_rel)
           + _cross(s.alpha, r) + _cross(s.omega, w_x_r)),
    )


def _axis_rotation(axis: int, angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    if axis == 0:
        return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
    if axis == 1:
        return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _attachments_by_index(plan: ChainPlan) -> dict[int, list]:
    by_index: dict[int, list] = {}
    for att in plan.attachments.values():
        by_index.setdefault(att.index, []).append(att)
    return by_index


_JOINT, _BASE_LIN, _BASE_ROT, _CONST, _SNAP = range(5)


def compile_program(plan: ChainPlan, geometry: SensorGeometry = SensorGeometry()) -> list[tuple]:
    """Flatten a plan into evaluation steps.

    Runs of constant elements between driven steps and snapshots are merged
    into a single rigid offset, so repeated evaluation over time only pays
    for the driven joints.
    """
    by_index = _attachments_by_index(plan)
    program: list[tuple] = []
    pending = None

    def flush():
        nonlocal pending
        if pending is not None:
            program.append((_CONST, pending[:3, :3].copy(), pending[:3, 3].copy(),
                            not np.any(pending[:3, 3])))
            pending = None

    n = len(plan.elements)
    for k in range(n + 1):
        if k in by_index:
            flush()
            for att in by_index[k]:
                program.append((_SNAP, att.name, *geometry.mount(att)))
        if k == n:
            break
        el = plan.elements[k]
        if not el.driven:
            pending = el.matrix() if pending is None else pending @ el.matrix()
            continue
        flush()
        if el.kind is TransformKind.JOINT_ROT_Z:
            program.append((_JOINT, el.link, propagate_revolute))
        elif el.kind is TransformKind.JOINT_TRANS_Z:
            program.append((_JOINT, el.link, propagate_prismatic))
        elif el.kind is TransformKind.BASE_CARTESIAN:
            program.append((_BASE_LIN,))
        else:
            program.append((_BASE_ROT, tuple("xyz".index(c) for c in el.meta[0])))
    flush()
    return program


def run_program(program, plan: ChainPlan, jt: JointOscTable, bt: BaseOscTable, t: float) -> dict[str, FrameState]:
    joints = {i: joint_motion(jt, i, kind, t) for i, kind in plan.joint_slots.items()}
    base = base_motion(bt, t)
    out: dict[str, FrameState] = {}
    s = FrameState.identity()
    for step in program:
        op = step[0]
        if op == _CONST:
            _, Rc, pc, pure_rotation = step
            if pure_rotation:
                s = FrameState(s.R @ Rc, s.p, s.omega, s.v, s.alpha, s.a)
            else:
                s = propagate_const(s, Rc, pc)
        elif op == _JOINT:
            s = step[2](s, joints[step[1]])
        elif op == _SNAP:
            out[step[1]] = propagate_const(s, step[2], step[3])
        elif op == _BASE_LIN:
            for axis in range(3):
                s = propagate_prismatic(s, base[axis], axis)
        else:
            for axis in step[1]:
                s = propagate_revolute(s, base[3 + axis], axis)
    return out


def evaluate_chain(
    plan: ChainPlan,
    jt: JointOscTable,
    bt: BaseOscTable,
    t: float,
    geometry: SensorGeometry = SensorGeometry(),
) -> dict[str, FrameState]:
    """FrameState of every attachment frame of ``plan`` at time ``t``."""
    return run_program(compile_program(plan, geometry), plan, jt, bt, t)


def fk_pose(
    plan: ChainPlan,
    joint_values: Mapping[int, float],
    base_values: Sequence[float] = (0.0,) * 6,
    geometry: SensorGeometry = SensorGeometry(),
) -> dict[str, Pose]:
    """Pose of every attachment frame by plain 4x4 matrix products.

    ``joint_values`` maps each joint slot to its position; ``base_values``
    is ``(tx, ty, tz, rx, ry, rz)``.
    """
    missing = set(plan.joint_slots) - set(joint_values)
    if missing:
        raise MissingJointValue(f"no value for joint(s) {sorted(missing)}")
    by_index = _attachments_by_index(plan)
    out: dict[str, Pose] = {}
    T = np.eye(4)
    n = len(plan.elements)
    for k in range(n + 1):
        for att in by_index.get(k, ()):
            Rc, pc = geometry.mount(att)
            M = np.eye(4)
            M[:3, :3] = Rc
            M[:3, 3] = pc
            Ts = T @ M
            out[att.name] = Pose(Ts[:3, :3], Ts[:3, 3])
        if k == n:
            break
        el = plan.elements[k]
        if el.kind in (TransformKind.JOINT_ROT_Z, TransformKind.JOINT_TRANS_Z):
            q = joint_values[el.link]
        elif el.kind is TransformKind.BASE_CARTESIAN:
            q = tuple(base_values[:3])
        elif el.kind is TransformKind.BASE_GIMBAL:
            q = tuple(base_values[3:])
        else:
            q = None
        T = T @ el.matrix(q)
    return out


def _vee(M: np.ndarray) -> np.ndarray:
    S = 0.5 * (M - M.T)
    return np.array([S[2, 1], S[0, 2], S[1, 0]])


def finite_difference_oracle(
    plan: ChainPlan,
    jt: JointOscTable,
    bt: BaseOscTable,
    t: float,
    h: float = 1e-4,
    geometry: SensorGeometry = SensorGeometry(),
) -> dict[str, dict[str, np.ndarray]]:
    """Central-difference estimates of omega, v, alpha and a for every frame.

    Only positions of the trajectories are sampled; their derivatives are
    never consulted.
    """
    if h <= 0:
        raise ValueError("step h must be positive")

    def poses_at(tau):
        jv = {i: joint_motion(jt, i, kind, tau).q for i, kind in plan.joint_slots.items()}
        bv = [m.q for m in base_motion(bt, tau)]
        return fk_pose(plan, jv, bv, geometry)

    P = {k: poses_at(t + k * h) for k in (-2, -1, 0, 1, 2)}

    def omega_at(k, name):
        Rdot = (P[k + 1][name].R - P[k - 1][name].R) / (2.0 * h)
        return _vee(Rdot @ P[k][name].R.T)

    out = {}
    for name in P[0]:
        p_m, p_0, p_p = P[-1][name].p, P[0][name].p, P[1][name].p
        out[name] = {
            "omega": omega_at(0, name),
            "v": (p_p - p_m) / (2.0 * h),
            "alpha": (omega_at(1, name) - omega_at(-1, name)) / (2.0 * h),
            "a": (p_p - 2.0 * p_0 + p_m) / (h * h),
        }
    return out
