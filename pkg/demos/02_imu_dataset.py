"""Generate a noisy IMU dataset for a randomly drawn arm and look at it."""
import tempfile
from pathlib import Path

import numpy as np

from manipsim.chain_model import compile_chain
from manipsim.cli import RunConfig, run_once
from manipsim.dataset_io import column_names, read_dataset, sensor_column
from manipsim.randomizer import randomize_config
from manipsim.sensors import ImuConfig
from manipsim.simulation import simulate

dh, jt, bt = randomize_config(seed=11)
print("drawn link types:", [k.letter for k in dh.link_types])

# %% Simulate 5 s at 100 Hz, readings resolved in each sensor's own frame.
imu = ImuConfig(include_gravity=True, sigma_gyro=1e-3, sigma_accel=1e-2, rng_seed=11)
data = simulate(compile_chain(dh), jt, bt, duration=5.0, sample_rate=100.0, imu=imu)
print("dataset shape:", data.shape)

# Every run has the same 91 columns; empty links just stay at zero.
names = column_names()
c = sensor_column("tool_imu")
print("tool IMU columns:", names[c:c + 6])
print("tool accel mean:", data[:, c + 3:c + 6].mean(axis=0).round(3))

silent = [i for i in range(1, 7) if not np.any(data[:, i])]
print("joint columns that never move:", silent)

# %% The same thing through the run API, which also writes a manifest.
with tempfile.TemporaryDirectory() as tmp:
    cfg = RunConfig(mode=1, seed=11, duration=1.0, sample_rate=50.0, out=str(Path(tmp) / "run.csv"))
    data_path, manifest_path = run_once(cfg)
    header, arr = read_dataset(data_path)
    print(data_path.name, arr.shape, "manifest:", manifest_path.name)
