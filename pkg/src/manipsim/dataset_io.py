"""Dataset layout, CSV/binary writers and the run manifest.

A dataset row has 91 columns::

    time | joint1..joint6 | base IMU (6) | tool IMU (6) | link1 mid (6), link1 end (6) | ... | link6 end

Each IMU block is ``wx, wy, wz, ax, ay, az``. Empty links write zeros in
their joint column and in their 12 sensor columns.

Every dataset is written together with a JSON manifest holding the three
input tables (``senSenDH``, ``senSenJ``, ``senSenB``) and every run setting,
which is enough to regenerate the file bit for bit.
"""
from __future__ import annotations

import json
import math
import os
import struct
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from manipsim.chain_model import N_LINKS, ChainPlan, DHTable, parse_dh_table
from manipsim.errors import (
    DatasetFormatError,
    DatasetIOError,
    FormatVersionMismatch,
    InconsistentPlan,
)
from manipsim.sensors import CHANNELS, ImuSample
from manipsim.trajectory import BaseOscTable, JointOscTable

FORMAT_VERSION = 1
N_COLUMNS = 91
BINARY_MAGIC = b"MSIMDAT1"
MANIFEST_SUFFIX = ".manifest.json"


def _imu_columns(prefix: str) -> list[str]:
    return [f"{prefix}_{c}" for c in CHANNELS]


def column_names() -> list[str]:
    names = ["time"] + [f"joint{i}" for i in range(1, N_LINKS + 1)]
    names += _imu_columns("base_imu") + _imu_columns("tool_imu")
    for i in range(1, N_LINKS + 1):
        names += _imu_columns(f"link{i}_imu_mid") + _imu_columns(f"link{i}_imu_end")
    return names


COLUMNS = column_names()
assert len(COLUMNS) == N_COLUMNS


def sensor_column(sensor_name: str) -> int:
    """Index of the first column of a sensor's 6-wide block."""
    return COLUMNS.index(f"{sensor_name}_wx")


def assemble_record(
    t: float,
    joint_values: Mapping[int, float],
    imu: Mapping[str, ImuSample],
    plan: ChainPlan,
) -> np.ndarray:
    """Lay out one time step as a 91-wide row."""
    expected = set(plan.sensor_names)
    if set(imu) != expected:
        extra, missing = sorted(set(imu) - expected), sorted(expected - set(imu))
        raise InconsistentPlan(f"sensor set does not match plan (extra {extra}, missing {missing})")
    if set(joint_values) != set(plan.joint_slots):
        raise InconsistentPlan(
            f"joint values for {sorted(joint_values)} but plan has joints {sorted(plan.joint_slots)}"
        )
    row = np.zeros(N_COLUMNS)
    row[0] = t
    for i, q in joint_values.items():
        row[i] = q
    for name, sample in imu.items():
        j = sensor_column(name)
        row[j:j + 6] = sample
    return row


@dataclass
class RunManifest:
    senSenDH: list
    senSenJ: list
    senSenB: list
    seed: int
    mode: int
    sample_rate: float
    duration: float
    noise: bool = True
    imu: dict = field(default_factory=dict)
    geometry: dict = field(default_factory=dict)
    gimbal_order: str = "xyz"
    randomize_each_run: bool = False
    ranges: dict = field(default_factory=dict)
    prng: str = ""
    dataset_file: str = ""
    dataset_format: str = "csv"
    n_columns: int = N_COLUMNS
    format_version: int = FORMAT_VERSION

    def tables(self) -> tuple[DHTable, JointOscTable, BaseOscTable]:
        return parse_dh_table(self.senSenDH), JointOscTable(self.senSenJ), BaseOscTable(self.senSenB)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> RunManifest:
        version = d.get("format_version")
        if version != FORMAT_VERSION:
            raise FormatVersionMismatch(f"manifest format_version {version!r}, expected {FORMAT_VERSION}")
        try:
            m = cls(**d)
        except TypeError as exc:
            raise DatasetFormatError(f"malformed manifest: {exc}") from None
        m.tables()
        return m


def n_samples(duration: float, sample_rate: float) -> int:
    # tolerance absorbs products such as 0.29 * 100 = 28.999999999999996
    return int(math.floor(duration * sample_rate + 1e-9)) + 1


def sample_times(duration: float, sample_rate: float) -> np.ndarray:
    return np.arange(n_samples(duration, sample_rate)) / sample_rate


def _atomic_write(path: Path, data: bytes) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise DatasetIOError(f"cannot write {path}: {exc}") from exc


def encode_csv(records: np.ndarray) -> bytes:
    records = np.asarray(records, dtype=float)
    lines = [",".join(COLUMNS)]
    # repr of a Python float is the shortest string that round-trips exactly
    lines += [",".join(map(repr, row)) for row in records.tolist()]
    return ("\n".join(lines) + "\n").encode("ascii")


def encode_binary(records: np.ndarray) -> bytes:
    records = np.ascontiguousarray(records, dtype="<f8")
    rows, cols = records.shape
    return BINARY_MAGIC + struct.pack("<IQI", FORMAT_VERSION, rows, cols) + records.tobytes()


def manifest_path_for(dataset_path) -> Path:
    p = Path(dataset_path)
    return p.with_name(p.stem + MANIFEST_SUFFIX)


def write_dataset(records, manifest: RunManifest, path, binary: bool = False) -> tuple[Path, Path]:
    """Write the dataset and its manifest sidecar; returns both paths."""
    records = np.asarray(records, dtype=float)
    if records.ndim != 2 or records.shape[1] != N_COLUMNS:
        raise InconsistentPlan(f"records must be (n, {N_COLUMNS}), got {records.shape}")
    path = Path(path)
    manifest.dataset_file = path.name
    manifest.dataset_format = "binary" if binary else "csv"
    _atomic_write(path, encode_binary(records) if binary else encode_csv(records))
    mpath = manifest_path_for(path)
    _atomic_write(mpath, (json.dumps(manifest.to_dict(), indent=2) + "\n").encode())
    return path, mpath


def load_manifest(path) -> RunManifest:
    """Read a manifest, given either its own path or the dataset it describes."""
    path = Path(path)
    if not path.name.endswith(MANIFEST_SUFFIX):
        path = manifest_path_for(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DatasetIOError(f"cannot read manifest {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise DatasetFormatError(f"{path}: manifest must be a JSON object")
    return RunManifest.from_dict(data)


def read_dataset(path) -> tuple[list[str], np.ndarray]:
    """Load a CSV or binary dataset as ``(column names, array)``."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise DatasetIOError(f"cannot read {path}: {exc}") from exc
    if raw.startswith(BINARY_MAGIC):
        return COLUMNS, _decode_binary(raw, path)
    return _decode_csv(raw, path)


def _decode_binary(raw: bytes, path) -> np.ndarray:
    head = len(BINARY_MAGIC)
    if len(raw) < head + 16:
        raise DatasetFormatError(f"{path}: truncated binary header")
    version, rows, cols = struct.unpack("<IQI", raw[head:head + 16])
    if version != FORMAT_VERSION:
        raise FormatVersionMismatch(f"{path}: binary format_version {version}, expected {FORMAT_VERSION}")
    body = raw[head + 16:]
    if len(body) != rows * cols * 8:
        raise DatasetFormatError(f"{path}: expected {rows}x{cols} values, file holds {len(body) // 8}")
    return np.frombuffer(body, dtype="<f8").reshape(rows, cols).copy()


def _decode_csv(raw: bytes, path) -> tuple[list[str], np.ndarray]:
    try:
        text = raw.decode("ascii")
    except UnicodeDecodeError:
        raise DatasetFormatError(f"{path}: not an ASCII CSV dataset") from None
    lines = text.splitlines()
    if not lines:
        raise DatasetFormatError(f"{path}: empty file")
    header = lines[0].split(",")
    if header != COLUMNS:
        raise DatasetFormatError(f"{path}: header has {len(header)} columns, expected the {N_COLUMNS}-column layout")
    if not text.endswith("\n"):
        raise DatasetFormatError(f"{path}: file is truncated (no final newline)")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != N_COLUMNS:
            raise DatasetFormatError(f"{path}:{lineno}: {len(cells)} columns, expected {N_COLUMNS}")
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            raise DatasetFormatError(f"{path}:{lineno}: non-numeric cell") from None
    return header, np.array(rows, dtype=float).reshape(-1, N_COLUMNS)
