import json

import numpy as np
import pytest

from manipsim.chain_model import compile_chain
from manipsim.dataset_io import (
    COLUMNS,
    N_COLUMNS,
    RunManifest,
    assemble_record,
    encode_csv,
    load_manifest,
    n_samples,
    read_dataset,
    sample_times,
    sensor_column,
    write_dataset,
)
from manipsim.errors import DatasetFormatError, DatasetIOError, FormatVersionMismatch, InconsistentPlan
from manipsim.sensors import ImuConfig, ImuSample
from manipsim.simulation import simulate, simulate_manifest
from manipsim.trajectory import BaseOscTable, JointOscTable

from conftest import TABLE3, TABLE4, random_tables


def test_column_layout():
    assert len(COLUMNS) == N_COLUMNS == 1 + 6 + 6 + 6 + 72
    assert COLUMNS[0] == "time"
    assert COLUMNS[1:7] == [f"joint{i}" for i in range(1, 7)]
    assert sensor_column("base_imu") == 7
    assert sensor_column("tool_imu") == 13
    assert sensor_column("link1_imu_mid") == 19
    assert sensor_column("link1_imu_end") == 25
    assert sensor_column("link6_imu_end") == 85
    assert COLUMNS[7:13] == [f"base_imu_{c}" for c in ("wx", "wy", "wz", "ax", "ay", "az")]


def _manifest(dh=TABLE3, seed=1, **kw):
    _, jt, bt = random_tables(seed)
    return RunManifest(
        senSenDH=np.asarray(dh).tolist(), senSenJ=jt.tolist(), senSenB=bt.tolist(),
        seed=seed, mode=2, sample_rate=20.0, duration=0.5, **kw,
    )


def test_assemble_all_empty_static():
    plan = compile_chain(np.zeros((8, 5)))
    g = ImuSample(0, 0, 0, 0, 0, 9.80665)
    row = assemble_record(0.25, {}, {"base_imu": g, "tool_imu": g}, plan)
    assert row.shape == (N_COLUMNS,)
    assert row[0] == 0.25
    assert row[12] == row[18] == 9.80665
    assert np.count_nonzero(row) == 3


def test_assemble_places_values():
    plan = compile_chain(TABLE4)
    joints = {i: float(i) for i in plan.joint_slots}
    imu = {n: ImuSample(*(k + 0.1 * j for j in range(6))) for k, n in enumerate(plan.sensor_names, 1)}
    row = assemble_record(1.0, joints, imu, plan)
    assert row[2] == 0.0 and row[3] == 3.0
    j = sensor_column("link2_imu_mid")
    assert np.all(row[j:j + 12] == 0)
    k = sensor_column("link5_imu_end")
    np.testing.assert_array_equal(row[k:k + 6], imu["link5_imu_end"])


def test_assemble_rejects_mismatch():
    plan = compile_chain(TABLE4)
    imu = {n: ImuSample(0, 0, 0, 0, 0, 0) for n in plan.sensor_names}
    joints = {i: 0.0 for i in plan.joint_slots}
    with pytest.raises(InconsistentPlan):
        assemble_record(0.0, joints, {**imu, "link2_imu_mid": imu["base_imu"]}, plan)
    imu.pop("tool_imu")
    with pytest.raises(InconsistentPlan):
        assemble_record(0.0, joints, imu, plan)
    with pytest.raises(InconsistentPlan):
        assemble_record(0.0, {1: 0.0}, {n: ImuSample(0, 0, 0, 0, 0, 0) for n in plan.sensor_names}, plan)


@pytest.mark.parametrize("duration, rate, rows", [(1.0, 100, 101), (10, 200, 2001), (0.29, 100, 30), (0.5, 3, 2)])
def test_row_count(duration, rate, rows):
    assert n_samples(duration, rate) == rows
    t = sample_times(duration, rate)
    assert t[0] == 0 and len(t) == rows
    np.testing.assert_allclose(np.diff(t), 1 / rate, atol=1e-12)


def test_write_and_read_round_trip(tmp_path):
    data = np.random.default_rng(0).normal(size=(5, N_COLUMNS))
    m = _manifest()
    path, mpath = write_dataset(data, m, tmp_path / "run.csv")
    assert mpath.name == "run.manifest.json"
    header, back = read_dataset(path)
    assert header == COLUMNS
    assert back.tobytes() == data.tobytes()
    loaded = load_manifest(path)
    assert loaded.dataset_file == "run.csv"
    for a, b in zip(loaded.tables(), m.tables()):
        np.testing.assert_allclose(a.as_array(), b.as_array(), atol=1e-15)
        assert a.as_array().tobytes() == b.as_array().tobytes()


def test_binary_round_trip(tmp_path):
    data = np.random.default_rng(1).normal(size=(7, N_COLUMNS))
    path, _ = write_dataset(data, _manifest(), tmp_path / "run.bin", binary=True)
    assert path.read_bytes()[:8] == b"MSIMDAT1"
    _, back = read_dataset(path)
    assert back.tobytes() == data.tobytes()
    assert load_manifest(path).dataset_format == "binary"


def test_header_is_first_line(tmp_path):
    path, _ = write_dataset(np.zeros((2, N_COLUMNS)), _manifest(), tmp_path / "x.csv")
    first = path.read_text().splitlines()[0].split(",")
    assert len(first) == 91 and first[0] == "time"


def test_no_temp_files_left(tmp_path):
    write_dataset(np.zeros((2, N_COLUMNS)), _manifest(), tmp_path / "x.csv")
    assert sorted(p.name for p in tmp_path.iterdir()) == ["x.csv", "x.manifest.json"]


def test_truncated_csv(tmp_path):
    path, _ = write_dataset(np.ones((3, N_COLUMNS)), _manifest(), tmp_path / "x.csv")
    raw = path.read_bytes()
    path.write_bytes(raw[: len(raw) // 2])
    with pytest.raises(DatasetFormatError):
        read_dataset(path)


def test_truncated_binary(tmp_path):
    path, _ = write_dataset(np.ones((3, N_COLUMNS)), _manifest(), tmp_path / "x.bin", binary=True)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(DatasetFormatError):
        read_dataset(path)


def test_missing_files(tmp_path):
    with pytest.raises(DatasetIOError):
        read_dataset(tmp_path / "nope.csv")
    with pytest.raises(DatasetIOError):
        load_manifest(tmp_path / "nope.csv")


def test_manifest_version_mismatch(tmp_path):
    _, mpath = write_dataset(np.zeros((1, N_COLUMNS)), _manifest(), tmp_path / "x.csv")
    d = json.loads(mpath.read_text())
    d["format_version"] = 99
    mpath.write_text(json.dumps(d))
    with pytest.raises(FormatVersionMismatch):
        load_manifest(mpath)
    mpath.write_text("{ not json")
    with pytest.raises(DatasetFormatError):
        load_manifest(mpath)


def test_manifest_tables_validated(tmp_path):
    bad = TABLE3.copy()
    bad[0, 4] = 7
    m = _manifest()
    m.senSenDH = bad.tolist()
    _, mpath = write_dataset(np.zeros((1, N_COLUMNS)), m, tmp_path / "x.csv")
    with pytest.raises(Exception, match="link type"):
        load_manifest(mpath)


def test_table4_empty_link_columns_zero():
    dh, jt, bt = random_tables(2)
    plan = compile_chain(TABLE4)
    data = simulate(plan, JointOscTable(jt), BaseOscTable(bt), 1.0, 50)
    assert data.shape == (51, N_COLUMNS)
    j = sensor_column("link2_imu_mid")
    assert np.all(data[:, 2] == 0)
    assert np.all(data[:, j:j + 12] == 0)
    # every other joint moves
    assert all(np.any(data[:, i] != 0) for i in (1, 3, 4, 5, 6))


def test_simulate_manifest_is_pure():
    m = _manifest()
    a = simulate_manifest(m)
    b = simulate_manifest(m)
    assert a.tobytes() == b.tobytes()
    assert encode_csv(a) == encode_csv(b)


def test_noise_seed_follows_manifest():
    a = simulate_manifest(_manifest(seed=1))
    m = _manifest(seed=1)
    m.seed = 2
    assert not np.array_equal(a, simulate_manifest(m))
    m = _manifest(seed=1, noise=False)
    clean = simulate_manifest(m)
    noise = a - clean
    assert np.all(noise[:, 0] == 0)
    assert np.std(noise[:, 7:10]) == pytest.approx(ImuConfig().sigma_gyro, rel=0.5)
