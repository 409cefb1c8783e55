import json

import numpy as np
import pytest

from manipsim.cli import RunConfig, dump_scene, inspect, main, run_batch, run_once
from manipsim.dataset_io import N_COLUMNS, read_dataset
from manipsim.errors import ConfigError

from conftest import TABLE3


def write_table(path, arr):
    np.savetxt(path, arr, delimiter=",")
    return str(path)


@pytest.fixture
def table3_files(tmp_path):
    rng = np.random.default_rng(0)
    jt = np.column_stack([rng.uniform(0, 1, 8), rng.uniform(0, 0.2, 8), np.zeros(8),
                          rng.uniform(0.1, 2, 8), rng.uniform(0, 6, 8)])
    bt = np.array([[0.1, 0, 0.5, 0], [0.2, 0, 0.3, 1.0]])
    return (write_table(tmp_path / "dh.csv", TABLE3),
            write_table(tmp_path / "j.csv", jt),
            write_table(tmp_path / "b.csv", bt))


def test_run_mode1_row_count(tmp_path, capsys):
    out = tmp_path / "d.csv"
    assert main(["run", "--mode", "1", "--seed", "7", "--duration", "1", "--rate", "100", "--out", str(out)]) == 0
    header, data = read_dataset(out)
    assert data.shape == (101, N_COLUMNS)
    assert (tmp_path / "d.manifest.json").exists()


def test_run_mode2_table3(tmp_path, table3_files):
    dh, j, b = table3_files
    out = tmp_path / "t3.csv"
    rc = main(["run", "--mode", "2", "--dh", dh, "--joints", j, "--base", b,
               "--duration", "0.5", "--rate", "20", "--out", str(out)])
    assert rc == 0
    _, data = read_dataset(out)
    # all six links are joints in this table, so every joint column moves
    assert all(np.any(data[:, i] != 0) for i in range(1, 7))
    text = inspect(out)
    assert "joints: 6  types: [P,R,R,R,P,R]" in text
    assert "sensors: 14" in text


def test_mode2_without_tables_is_config_error(tmp_path, capsys):
    assert main(["run", "--mode", "2", "--out", str(tmp_path / "x.csv")]) == 2
    assert "MODE 2" in capsys.readouterr().err


def test_zero_duration_writes_nothing(tmp_path):
    assert main(["run", "--duration", "0", "--out", str(tmp_path / "x.csv")]) == 2
    assert list(tmp_path.iterdir()) == []


def test_io_error_exit_code(tmp_path):
    assert main(["run", "--mode", "2", "--dh", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "x.csv")]) == 3
    assert main(["inspect", str(tmp_path / "missing.csv")]) == 3


def test_inspect_truncated(tmp_path, capsys):
    out = tmp_path / "d.csv"
    run_once(RunConfig(duration=0.2, sample_rate=20, out=str(out)))
    raw = out.read_bytes()
    out.write_bytes(raw[:300])
    assert main(["inspect", str(out)]) == 3
    assert "header has 26 columns" in capsys.readouterr().err
    out.write_bytes(raw[:3000])
    assert main(["inspect", str(out)]) == 3
    assert "truncated" in capsys.readouterr().err


def test_batch_randomized(tmp_path):
    cfg = RunConfig(seed=5, duration=0.2, sample_rate=10, out=str(tmp_path / "b.csv"),
                    batch_count=3, randomize_each_run=True)
    written = run_batch(cfg)
    seeds = [json.loads(m.read_text())["seed"] for _, m in written]
    assert seeds == [5, 6, 7]
    summary = json.loads((tmp_path / "b_batch.json").read_text())
    assert [i["seed"] for i in summary["items"]] == [5, 6, 7]
    dhs = {json.dumps(json.loads(m.read_text())["senSenDH"]) for _, m in written}
    assert len(dhs) >= 2


def test_batch_without_randomization_is_identical(tmp_path):
    cfg = RunConfig(seed=5, duration=0.2, sample_rate=10, out=str(tmp_path / "b.csv"), batch_count=3)
    written = run_batch(cfg)
    blobs = {d.read_bytes() for d, _ in written}
    assert len(blobs) == 1


def test_batch_of_one_equals_run_once(tmp_path):
    cfg = RunConfig(seed=2, duration=0.2, sample_rate=10, out=str(tmp_path / "b.csv"))
    (d_batch, _), = run_batch(cfg)
    d_once, _ = run_once(RunConfig(seed=2, duration=0.2, sample_rate=10, out=str(tmp_path / "o.csv")))
    assert d_batch.read_bytes() == d_once.read_bytes()


def test_batch_failure_keeps_completed(tmp_path, monkeypatch):
    import manipsim.cli as cli

    real = cli.run_once
    calls = []

    def flaky(cfg, out=None, seed=None, tables=None):
        calls.append(seed)
        if len(calls) == 2:
            raise ConfigError("boom")
        return real(cfg, out, seed, tables)

    monkeypatch.setattr(cli, "run_once", flaky)
    cfg = RunConfig(seed=1, duration=0.2, sample_rate=10, out=str(tmp_path / "b.csv"),
                    batch_count=3, randomize_each_run=True)
    with pytest.raises(cli.BatchError) as err:
        run_batch(cfg)
    assert err.value.index == 1
    assert (tmp_path / "b_000.csv").exists()
    summary = json.loads((tmp_path / "b_batch.json").read_text())
    assert summary["completed"] == 1 and summary["failed_index"] == 1


def test_same_config_byte_identical(tmp_path):
    for name in ("a", "b"):
        run_once(RunConfig(seed=3, duration=0.3, sample_rate=10, out=str(tmp_path / f"{name}.csv")))
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    ma = json.loads((tmp_path / "a.manifest.json").read_text())
    mb = json.loads((tmp_path / "b.manifest.json").read_text())
    ma.pop("dataset_file"), mb.pop("dataset_file")
    assert ma == mb


def test_dump_scene_all_empty():
    cfg = RunConfig(mode=2, dh=np.zeros((8, 5)), joints=np.zeros((8, 5)), base=np.zeros((2, 4)))
    scene = dump_scene(cfg)
    assert [f["name"] for f in scene["frames"]] == ["base_imu", "tool_imu", "tooltip"]


def test_dump_scene_cli(tmp_path, table3_files, capsys):
    dh, j, b = table3_files
    assert main(["dump-scene", "--mode", "2", "--dh", dh, "--joints", j, "--base", b]) == 0
    scene = json.loads(capsys.readouterr().out)
    assert len(scene["frames"]) == 15
    assert scene["link_types"] == list("PRRRPR")


def test_validate_cli(capsys):
    assert main(["validate", "--seed", "4", "--duration", "3", "--times", "2"]) == 0
    assert "max |a error|" in capsys.readouterr().out


def test_config_file_and_overrides(tmp_path, table3_files):
    dh, j, b = table3_files
    cfg_path = tmp_path / "run.yaml"
    cfg_path.write_text(
        f"mode: 2\ndh: {dh}\njoints: {j}\nbase: {b}\nduration: 0.3\nsample_rate: 10\n"
        f"imu:\n  include_gravity: true\n  resolve_in: world\ngeometry:\n  lateral_offset: 0.02\n"
        f"out: {tmp_path / 'cfg.csv'}\n"
    )
    assert main(["run", "--config", str(cfg_path), "--rate", "20", "--no-noise"]) == 0
    _, data = read_dataset(tmp_path / "cfg.csv")
    assert data.shape[0] == 7
    m = json.loads((tmp_path / "cfg.manifest.json").read_text())
    assert m["imu"]["include_gravity"] and m["geometry"]["lateral_offset"] == 0.02 and not m["noise"]


def test_unknown_config_key(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("bogus: 1\n")
    assert main(["run", "--config", str(p)]) == 2


def test_manifest_replay_flag(tmp_path):
    first = tmp_path / "a.csv"
    assert main(["run", "--seed", "8", "--duration", "0.5", "--rate", "10", "--out", str(first)]) == 0
    second = tmp_path / "b.csv"
    assert main(["run", "--manifest", str(tmp_path / "a.manifest.json"), "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_binary_flag(tmp_path):
    out = tmp_path / "d.bin"
    assert main(["run", "--duration", "0.2", "--rate", "10", "--binary", "--out", str(out)]) == 0
    _, data = read_dataset(out)
    assert data.shape == (3, N_COLUMNS)
