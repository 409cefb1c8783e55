"""Command-line entry point: ``manipsim run|batch|inspect|dump-scene|validate``.

Exit codes: 0 success, 2 configuration error, 3 file error, 4 internal
invariant violation.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from manipsim.chain_model import SensorGeometry, compile_chain
from manipsim.dataset_io import (
    COLUMNS,
    MANIFEST_SUFFIX,
    RunManifest,
    load_manifest,
    manifest_path_for,
    read_dataset,
    write_dataset,
    _atomic_write,
)
from manipsim.errors import ConfigError, DatasetIOError, ManipSimError
from manipsim.kinematics import evaluate_chain, finite_difference_oracle, fk_pose
from manipsim.randomizer import PRNG_ID, RandomRanges, RunMode, post_run_hook, resolve_inputs
from manipsim.sensors import ImuConfig
from manipsim.simulation import simulate

log = logging.getLogger("manipsim")

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_INTERNAL = 0, 2, 3, 4


@dataclass
class RunConfig:
    mode: int = 1
    seed: int = 0
    duration: float = 10.0
    sample_rate: float = 200.0
    ranges: RandomRanges = field(default_factory=RandomRanges)
    imu: dict = field(default_factory=dict)
    geometry: SensorGeometry = field(default_factory=SensorGeometry)
    gimbal_order: str = "xyz"
    dh: list | None = None
    joints: list | None = None
    base: list | None = None
    out: str = "dataset.csv"
    batch_count: int = 1
    randomize_each_run: bool = False
    noise: bool = True
    binary: bool = False

    def validate(self) -> None:
        if not self.duration > 0:
            raise ConfigError(f"duration must be > 0, got {self.duration}")
        if not self.sample_rate > 0:
            raise ConfigError(f"sample rate must be > 0, got {self.sample_rate}")
        if self.batch_count < 1:
            raise ConfigError(f"batch count must be >= 1, got {self.batch_count}")
        RunMode(self.mode, self.randomize_each_run)
        self.imu_config(self.seed)

    @property
    def run_mode(self) -> RunMode:
        return RunMode(self.mode, self.randomize_each_run)

    def imu_config(self, seed: int) -> ImuConfig:
        try:
            return ImuConfig(**{**self.imu, "rng_seed": seed})
        except TypeError as exc:
            raise ConfigError(f"bad imu settings: {exc}") from None

    def tables(self, seed: int):
        return resolve_inputs(self.run_mode, self.dh, self.joints, self.base, seed, self.ranges)


def load_table(path) -> list:
    """Read one input table from CSV/whitespace text or from a JSON list."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DatasetIOError(f"cannot read table {path}: {exc}") from exc
    if path.suffix == ".json":
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    rows = [line.replace(",", " ").split() for line in text.splitlines()]
    try:
        return [[float(x) for x in r] for r in rows if r and not r[0].startswith("#")]
    except ValueError:
        raise ConfigError(f"{path}: table cells must be numeric") from None


def _apply_manifest(cfg: RunConfig, m: RunManifest) -> None:
    cfg.mode = 2
    cfg.dh, cfg.joints, cfg.base = m.senSenDH, m.senSenJ, m.senSenB
    cfg.seed, cfg.duration, cfg.sample_rate = m.seed, m.duration, m.sample_rate
    cfg.noise, cfg.gimbal_order = m.noise, m.gimbal_order
    cfg.imu = {k: v for k, v in m.imu.items() if k != "rng_seed"}
    cfg.geometry = SensorGeometry(**m.geometry)
    cfg.binary = m.dataset_format == "binary"


def config_from_file(path) -> RunConfig:
    """Build a RunConfig from a YAML or JSON file (YAML is a superset of JSON)."""
    try:
        data = yaml.safe_load(Path(path).read_text()) or {}
    except OSError as exc:
        raise DatasetIOError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    cfg = RunConfig()
    base_dir = Path(path).parent
    for key, value in data.items():
        if key == "ranges":
            cfg.ranges = RandomRanges.from_dict(value)
        elif key == "geometry":
            try:
                cfg.geometry = SensorGeometry(**value)
            except TypeError as exc:
                raise ConfigError(f"{path}: bad geometry settings: {exc}") from None
        elif key in ("dh", "joints", "base"):
            setattr(cfg, key, load_table(base_dir / value) if isinstance(value, str) else value)
        elif key == "manifest":
            _apply_manifest(cfg, load_manifest(base_dir / value))
        elif hasattr(cfg, key):
            setattr(cfg, key, value)
        else:
            raise ConfigError(f"{path}: unknown config key {key!r}")
    return cfg


def make_manifest(cfg: RunConfig, seed: int, tables) -> RunManifest:
    dh, jt, bt = tables
    imu = cfg.imu_config(seed).to_dict()
    return RunManifest(
        senSenDH=dh.as_array().tolist(),
        senSenJ=jt.as_array().tolist(),
        senSenB=bt.as_array().tolist(),
        seed=seed,
        mode=int(cfg.mode),
        sample_rate=float(cfg.sample_rate),
        duration=float(cfg.duration),
        noise=cfg.noise,
        imu=imu,
        geometry=cfg.geometry.__dict__.copy(),
        gimbal_order=cfg.gimbal_order,
        randomize_each_run=cfg.randomize_each_run,
        ranges=cfg.ranges.to_dict(),
        prng=PRNG_ID,
    )


def _simulate(cfg: RunConfig, seed: int, tables) -> np.ndarray:
    dh, jt, bt = tables
    plan = compile_chain(dh, cfg.gimbal_order)
    return simulate(plan, jt, bt, cfg.duration, cfg.sample_rate,
                    cfg.imu_config(seed), cfg.geometry, cfg.noise)


def run_once(cfg: RunConfig, out=None, seed=None, tables=None) -> tuple[Path, Path]:
    """Resolve tables, simulate and write one dataset plus its manifest."""
    cfg.validate()
    seed = cfg.seed if seed is None else seed
    tables = cfg.tables(seed) if tables is None else tables
    records = _simulate(cfg, seed, tables)
    return write_dataset(records, make_manifest(cfg, seed, tables), out or cfg.out, cfg.binary)


class BatchError(ManipSimError):
    def __init__(self, index: int, cause: Exception):
        super().__init__(f"batch item {index} failed: {cause}")
        self.index = index
        self.cause = cause


def _indexed(out: Path, k: int) -> Path:
    return out.with_name(f"{out.stem}_{k:03d}{out.suffix}")


def run_batch(cfg: RunConfig) -> list[tuple[Path, Path]]:
    """Run ``batch_count`` simulations, re-drawing between runs when enabled.

    Outputs are ``<stem>_000.csv`` and so on, plus ``<stem>_batch.json``
    listing every seed. Completed items survive a failure later in the batch.
    """
    cfg.validate()
    out = Path(cfg.out)
    summary_path = out.with_name(f"{out.stem}_batch.json")
    seed = cfg.seed
    tables = None
    written, items = [], []
    failure = None
    for k in range(cfg.batch_count):
        try:
            if tables is None:
                tables = cfg.tables(seed)
            paths = run_once(cfg, _indexed(out, k), seed, tables)
        except ManipSimError as exc:
            failure = BatchError(k, exc)
            break
        written.append(paths)
        items.append({"index": k, "seed": seed, "dataset": paths[0].name, "manifest": paths[1].name})
        seed, tables = post_run_hook(cfg.run_mode, seed, tables, cfg.ranges)
    summary = {"batch_count": cfg.batch_count, "completed": len(items), "items": items}
    if failure is not None:
        summary["failed_index"] = failure.index
        summary["error"] = str(failure.cause)
    _atomic_write(summary_path, (json.dumps(summary, indent=2) + "\n").encode())
    if failure is not None:
        raise failure
    return written


def inspect(path) -> str:
    """Human-readable summary of a dataset file or a manifest."""
    path = Path(path)
    lines = [f"file: {path}"]
    manifest = None
    if path.name.endswith(MANIFEST_SUFFIX):
        manifest = load_manifest(path)
    else:
        header, data = read_dataset(path)
        lines.append(f"dataset: {data.shape[0]} rows x {data.shape[1]} columns")
        if data.shape[0]:
            lines.append(f"time span: {float(data[0, 0])!r} .. {float(data[-1, 0])!r} s")
        if manifest_path_for(path).exists():
            manifest = load_manifest(path)
    if manifest is not None:
        dh, jt, bt = manifest.tables()
        plan = compile_chain(dh, manifest.gimbal_order)
        kinds = [k.letter for k in dh.link_types]
        lines += [
            f"senSenDH {np.shape(manifest.senSenDH)}, senSenJ {np.shape(manifest.senSenJ)}, "
            f"senSenB {np.shape(manifest.senSenB)}",
            f"mode {manifest.mode}, seed {manifest.seed}, {manifest.sample_rate} Hz, {manifest.duration} s, "
            f"noise {'on' if manifest.noise else 'off'}",
            f"joints: {len(plan.joint_slots)}  types: [{','.join(kinds)}]",
            f"sensors: {len(plan.sensor_names)} ({', '.join(plan.sensor_names)})",
        ]
    lines.append("columns:")
    lines.append("  0 time, 1-6 joint1..joint6, 7-12 base_imu, 13-18 tool_imu")
    for i in range(1, 7):
        start = 19 + 12 * (i - 1)
        lines.append(f"  {start}-{start + 5} link{i}_imu_mid, {start + 6}-{start + 11} link{i}_imu_end")
    lines.append(f"  channel order per IMU: {', '.join(c.split('_')[-1] for c in COLUMNS[7:13])}")
    return "\n".join(lines)


def dump_scene(cfg: RunConfig) -> dict:
    """Rest pose (all trajectories at zero) of every recorded frame."""
    dh, _, _ = cfg.tables(cfg.seed)
    plan = compile_chain(dh, cfg.gimbal_order)
    poses = fk_pose(plan, {i: 0.0 for i in plan.joint_slots}, geometry=cfg.geometry)
    frames = []
    for name, att in plan.attachments.items():
        prev = plan.elements[att.index - 1] if att.index else None
        frames.append({
            "name": name,
            "link": att.link,
            "role": att.role,
            "position": np.round(poses[name].p, 12).tolist(),
            "rotation": np.round(poses[name].R, 12).tolist(),
            "after_element": att.index,
            "after_kind": prev.kind.value if prev else None,
        })
    return {
        "link_types": [k.letter for k in dh.link_types],
        "elements": [{"kind": e.kind.value, "value": e.value, "link": e.link} for e in plan.elements],
        "frames": frames,
    }


def validate_config(cfg: RunConfig, n_times: int = 5, h: float = 1e-4) -> dict[str, float]:
    """Largest gap between propagated and finite-difference frame derivatives."""
    dh, jt, bt = cfg.tables(cfg.seed)
    plan = compile_chain(dh, cfg.gimbal_order)
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    worst = {"omega": 0.0, "v": 0.0, "alpha": 0.0, "a": 0.0}
    for t in rng.uniform(0.0, cfg.duration, n_times):
        states = evaluate_chain(plan, jt, bt, float(t), cfg.geometry)
        fd = finite_difference_oracle(plan, jt, bt, float(t), h, cfg.geometry)
        for name, s in states.items():
            for key in worst:
                worst[key] = max(worst[key], float(np.max(np.abs(getattr(s, key) - fd[name][key]))))
    return worst


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML/JSON run configuration")
    common.add_argument("--manifest", help="replay the tables and settings of a manifest (MODE 2)")
    common.add_argument("--mode", type=int, choices=(1, 2))
    common.add_argument("--seed", type=int)
    common.add_argument("--duration", type=float)
    common.add_argument("--rate", type=float, help="sample rate in Hz")
    common.add_argument("--out")
    common.add_argument("--batch", type=int)
    common.add_argument("--no-noise", action="store_true")
    common.add_argument("--randomize-each-run", action="store_true")
    common.add_argument("--binary", action="store_true", help="write the packed binary format")
    common.add_argument("--dh", help="8x5 DH table (senSenDH)")
    common.add_argument("--joints", help="8x5 joint oscillation table (senSenJ)")
    common.add_argument("--base", help="2x4 base oscillation table (senSenB)")

    parser = argparse.ArgumentParser(prog="manipsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="simulate once and write a dataset")
    sub.add_parser("batch", parents=[common], help="simulate several runs")
    p = sub.add_parser("inspect", help="summarise a dataset or manifest")
    p.add_argument("path")
    sub.add_parser("dump-scene", parents=[common], help="print the rest pose of every frame as JSON")
    p = sub.add_parser("validate", parents=[common], help="check derivatives against finite differences")
    p.add_argument("--times", type=int, default=5)
    return parser


def config_from_args(args) -> RunConfig:
    cfg = config_from_file(args.config) if args.config else RunConfig()
    if args.manifest:
        _apply_manifest(cfg, load_manifest(args.manifest))
    overrides = {
        "mode": args.mode, "seed": args.seed, "duration": args.duration,
        "sample_rate": args.rate, "out": args.out, "batch_count": args.batch,
    }
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    if args.no_noise:
        cfg.noise = False
    if args.randomize_each_run:
        cfg.randomize_each_run = True
    if args.binary:
        cfg.binary = True
    for key in ("dh", "joints", "base"):
        path = getattr(args, key)
        if path:
            setattr(cfg, key, load_table(path))
    return cfg


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "inspect":
            print(inspect(args.path))
            return EXIT_OK
        cfg = config_from_args(args)
        if args.command == "run":
            data, manifest = run_once(cfg)
            print(f"wrote {data} and {manifest}")
        elif args.command == "batch":
            for data, _ in run_batch(cfg):
                print(f"wrote {data}")
        elif args.command == "dump-scene":
            print(json.dumps(dump_scene(cfg), indent=2))
        elif args.command == "validate":
            cfg.validate()
            worst = validate_config(cfg, args.times)
            for key, err in worst.items():
                print(f"max |{key} error| = {err:.3e}")
            if max(worst["omega"], worst["v"]) > 1e-5 or max(worst["alpha"], worst["a"]) > 1e-3:
                print("derivative check FAILED", file=sys.stderr)
                return EXIT_INTERNAL
    except BatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO if isinstance(exc.cause, DatasetIOError) else EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DatasetIOError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ManipSimError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
