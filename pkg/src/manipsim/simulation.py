"""The fixed-step simulation loop that turns tables into a dataset array."""
from __future__ import annotations

import numpy as np

from manipsim.chain_model import ChainPlan, SensorGeometry, compile_chain
from manipsim.dataset_io import N_COLUMNS, RunManifest, assemble_record, sample_times, sensor_column
from manipsim.kinematics import compile_program, run_program
from manipsim.sensors import ImuConfig, add_noise, measure, noise_stream
from manipsim.trajectory import BaseOscTable, JointOscTable, joint_motion


def simulate(
    plan: ChainPlan,
    jt: JointOscTable,
    bt: BaseOscTable,
    duration: float,
    sample_rate: float,
    imu: ImuConfig = ImuConfig(),
    geometry: SensorGeometry = SensorGeometry(),
    noise: bool = True,
) -> np.ndarray:
    """Sample the chain at ``k / sample_rate`` for ``k = 0 .. floor(duration * rate)``.

    Noise streams are keyed by each sensor's column position, so a sensor's
    noise does not change when other links are switched on or off.
    """
    if not duration > 0 or not sample_rate > 0:
        raise ValueError("duration and sample_rate must be positive")
    times = sample_times(duration, sample_rate)
    names = plan.sensor_names
    streams = {n: noise_stream(imu, sensor_column(n)) for n in names} if noise else {}
    program = compile_program(plan, geometry)
    out = np.empty((len(times), N_COLUMNS))
    for k, t in enumerate(times):
        t = float(t)
        states = run_program(program, plan, jt, bt, t)
        readings = {}
        for n in names:
            m = measure(states[n], imu)
            readings[n] = add_noise(m, imu, streams[n]) if noise else m
        joints = {i: joint_motion(jt, i, kind, t).q for i, kind in plan.joint_slots.items()}
        out[k] = assemble_record(t, joints, readings, plan)
    return out


def imu_config_from(manifest: RunManifest) -> ImuConfig:
    cfg = dict(manifest.imu)
    cfg.setdefault("rng_seed", manifest.seed)
    if "gravity" in cfg:
        cfg["gravity"] = tuple(cfg["gravity"])
    return ImuConfig(**cfg)


def simulate_manifest(manifest: RunManifest) -> np.ndarray:
    """Regenerate the dataset a manifest describes."""
    dh, jt, bt = manifest.tables()
    plan = compile_chain(dh, manifest.gimbal_order)
    geometry = SensorGeometry(**manifest.geometry)
    return simulate(
        plan, jt, bt, manifest.duration, manifest.sample_rate,
        imu_config_from(manifest), geometry, manifest.noise,
    )
