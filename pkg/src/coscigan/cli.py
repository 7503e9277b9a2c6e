"""Command-line entry point.

Every command resolves one run configuration from built-in defaults, the
optional ``--desk-scale`` presets, the ``--config`` JSON file and
``--seed``, in that order. Outputs land in ``--out``: a ``metrics.json``
whose bytes depend only on the configuration and seed, command-specific
CSV/JSON/NPZ artifacts, and a ``manifest.json`` recording the config hash,
seed, library versions, wall time and artifact digests.

Exit status: 0 on success, 2 for an invalid configuration, 1 for any other
failure (including a bench cell that raised).
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import platform
import sys
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .dataset import MTSDataset, load_csv, save_csv
from .downstream import AUGMENTATION_RATIOS, ClassifierSpec
from .eegsim import EegSimSpec
from .errors import ConfigError, CosciError
from .experiments import (
    ARMS,
    DESK_CLASSIFIER,
    DESK_EEG,
    DESK_EXPERIMENT,
    DESK_GAN,
    DESK_TOY,
    cd_wins,
    eeg_utility,
    run_cells,
    table1,
    table2,
    table3,
    table3_wins,
    toy_arm,
    toy_trials,
    trial_rows,
)
from .gan import FILE_KEYS, CosciConfig, CosciModel, load_model, sample, sample_baseline, save_model, train, train_baseline_joint
from .metrics import aed, awd, feature_corr_matrix, pairwise_report, pca_project, tsne_embed
from .toygen import ToySpec, Variant, generate_toy, spec_dict

COMMANDS = (
    "gen-toy",
    "train",
    "sample",
    "train-baseline",
    "eval",
    "bench",
    "repro-table1",
    "repro-table2",
    "repro-table3",
)

EXPERIMENT_DEFAULTS = {
    "n_seeds": 5,
    "n_samples": 256,
    "variants": [v.value for v in Variant],
    "channel_counts": [2, 3, 4, 5],
    "augmentation_ratios": [list(r) for r in AUGMENTATION_RATIOS],
    "tsne": False,
    "perplexity": 30.0,
}

SECTIONS = ("gan", "toy", "eeg", "classifier", "experiment")


@dataclass
class RunConfig:
    seed: int = 0
    gan: CosciConfig = field(default_factory=CosciConfig)
    toy: ToySpec = field(default_factory=ToySpec)
    eeg: EegSimSpec = field(default_factory=EegSimSpec)
    classifier: ClassifierSpec = field(default_factory=ClassifierSpec)
    experiment: dict = field(default_factory=lambda: dict(EXPERIMENT_DEFAULTS))

    def to_json(self) -> dict:
        toy = spec_dict(self.toy)
        return {
            "seed": self.seed,
            "gan": self.gan.to_file_dict(),
            "toy": toy,
            "eeg": {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self.eeg).items()},
            "classifier": asdict(self.classifier),
            "experiment": self.experiment,
        }

    def digest(self) -> str:
        return hashlib.sha256(canonical(self.to_json()).encode()).hexdigest()

    @property
    def seeds(self) -> list[int]:
        return [self.seed + i for i in range(self.experiment["n_seeds"])]


def canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _dataclass_section(name: str, cls, values: dict, base):
    known = {f.name for f in fields(cls)}
    for key in values:
        if key not in known:
            raise ConfigError(f"{name}.{key}: unknown key")
    coerced = {k: tuple(v) if isinstance(getattr(base, k), tuple) and isinstance(v, list) else v for k, v in values.items()}
    try:
        return replace(base, **coerced)
    except ConfigError as exc:
        raise ConfigError(f"{name}: {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: invalid value ({exc})") from None


def _gan_section(values: dict, base: CosciConfig) -> CosciConfig:
    merged = base.to_dict()
    for key, value in values.items():
        name = FILE_KEYS.get(key, key)
        if name not in merged:
            raise ConfigError(f"gan.{key}: unknown key")
        merged[name] = value
    try:
        return CosciConfig(**merged)
    except ConfigError as exc:
        raise ConfigError(f"gan: {exc}") from None
    except TypeError as exc:
        raise ConfigError(f"gan: invalid value ({exc})") from None


def _experiment_section(values: dict, base: dict) -> dict:
    out = dict(base)
    for key, value in values.items():
        if key not in EXPERIMENT_DEFAULTS:
            raise ConfigError(f"experiment.{key}: unknown key")
        out[key] = value
    if not isinstance(out["n_seeds"], int) or out["n_seeds"] < 1:
        raise ConfigError("experiment.n_seeds: must be a positive integer")
    if not isinstance(out["n_samples"], int) or out["n_samples"] < 2:
        raise ConfigError("experiment.n_samples: must be an integer >= 2")
    for v in out["variants"]:
        if v not in EXPERIMENT_DEFAULTS["variants"]:
            raise ConfigError(f"experiment.variants: unknown variant {v!r}")
    for r in out["augmentation_ratios"]:
        if len(r) != 2 or r[0] < 1 or r[1] < 0:
            raise ConfigError(f"experiment.augmentation_ratios: bad ratio {r!r}")
    return out


def resolve_config(raw: dict | None, desk_scale: bool = False, seed: int | None = None) -> RunConfig:
    """Layer defaults, desk presets, file values and the seed flag."""
    raw = dict(raw or {})
    for key in raw:
        if key != "seed" and key not in SECTIONS:
            raise ConfigError(f"{key}: unknown top-level key")
    run_seed = raw.get("seed", 0) if seed is None else seed
    if not isinstance(run_seed, int) or run_seed < 0:
        raise ConfigError("seed: must be a non-negative integer")
    cfg = RunConfig(seed=run_seed)
    layers = [raw]
    if desk_scale:
        desk = {"gan": DESK_GAN, "toy": DESK_TOY, "eeg": DESK_EEG, "classifier": DESK_CLASSIFIER,
                "experiment": DESK_EXPERIMENT}
        layers.insert(0, desk)
    for layer in layers:
        for section in SECTIONS:
            values = layer.get(section, {})
            if not isinstance(values, dict):
                raise ConfigError(f"{section}: must be an object")
            if section == "gan":
                cfg.gan = _gan_section(values, cfg.gan)
            elif section == "experiment":
                cfg.experiment = _experiment_section(values, cfg.experiment)
            else:
                cls = {"toy": ToySpec, "eeg": EegSimSpec, "classifier": ClassifierSpec}[section]
                setattr(cfg, section, _dataclass_section(section, cls, values, getattr(cfg, section)))
    # data seeds follow the run seed unless the file pins them
    if "seed" not in raw.get("toy", {}):
        cfg.toy = replace(cfg.toy, seed=run_seed)
    if "seed" not in raw.get("eeg", {}):
        cfg.eeg = replace(cfg.eeg, seed=run_seed)
    if "seed" not in raw.get("gan", {}):
        cfg.gan = replace(cfg.gan, seed=run_seed)
    return cfg


def load_config_file(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be an object")
    return raw


# ------------------------------------------------------------------ outputs


class Output:
    def __init__(self, root: Path):
        self.root = root
        root.mkdir(parents=True, exist_ok=True)
        self.artifacts: list[str] = []

    def path(self, name: str) -> Path:
        self.artifacts.append(name)
        return self.root / name

    def json(self, name: str, obj) -> None:
        self.path(name).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    def csv(self, name: str, rows: list[dict]) -> None:
        columns = list(dict.fromkeys(k for r in rows for k in r))
        with open(self.path(name), "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
            writer.writeheader()
            for r in rows:
                writer.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in r.items()})

    def manifest(self, command: str, cfg: RunConfig, wall: float, status: str) -> None:
        digests = {}
        for name in sorted(set(self.artifacts)):
            p = self.root / name
            if p.exists():
                digests[name] = hashlib.sha256(p.read_bytes()).hexdigest()
        manifest = {
            "command": command,
            "status": status,
            "config": cfg.to_json(),
            "config_hash": cfg.digest(),
            "seed": cfg.seed,
            "versions": {
                "coscigan": __version__,
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
            "wall_time_s": round(wall, 3),
            "artifacts": digests,
        }
        (self.root / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# ----------------------------------------------------------------- commands


def _need(args, name: str) -> Path:
    value = getattr(args, name)
    if value is None:
        raise ConfigError(f"--{name.replace('_', '-')}: required for {args.command}")
    return Path(value)


def cmd_gen_toy(cfg: RunConfig, args, out: Output) -> int:
    data, truth = generate_toy(cfg.toy)
    save_csv(data, out.path("data.csv"))
    truth.save_csv(out.path("truth.csv"))
    stats = {}
    for t in (1, 2):
        a = truth.amplitude[truth.patient_type == t]
        stats[f"type{t}"] = {"n": int(a.size), "amplitude_mean": float(a.mean()), "amplitude_sd": float(a.std(ddof=1)) if a.size > 1 else 0.0}
    out.json("metrics.json", {"shape": list(data.values.shape), "ground_truth": stats})
    return 0


def _train_common(cfg: RunConfig, args, out: Output, baseline: bool) -> int:
    data = load_csv(_need(args, "data"))
    gan = replace(cfg.gan, n_channels=data.n_channels, length=data.length)
    model = train_baseline_joint(gan, data) if baseline else train(CosciModel(gan), data)
    save_model(model, out.path("model.npz"))
    log = [{"epoch": e["epoch"], **{k: v for k, v in e.items() if k != "epoch"}} for e in model.epoch_log]
    out.csv("epoch_log.csv", log)
    out.json("metrics.json", {"kind": "joint" if baseline else "cosci", "epochs": len(log), "final": log[-1] if log else None})
    return 0


def cmd_train(cfg, args, out):
    return _train_common(cfg, args, out, baseline=False)


def cmd_train_baseline(cfg, args, out):
    return _train_common(cfg, args, out, baseline=True)


def cmd_sample(cfg: RunConfig, args, out: Output) -> int:
    model = load_model(_need(args, "model"))
    n = args.n if args.n is not None else cfg.experiment["n_samples"]
    draw = sample if isinstance(model, CosciModel) else sample_baseline
    synth = draw(model, n, seed=cfg.seed)
    save_csv(synth, out.path("synth.csv"))
    out.json("metrics.json", {"shape": list(synth.values.shape), "sha256": hashlib.sha256(synth.values.tobytes()).hexdigest()})
    return 0


def cmd_eval(cfg: RunConfig, args, out: Output) -> int:
    real = load_csv(_need(args, "real"))
    synth = load_csv(_need(args, "synth"), n_channels=real.n_channels)
    metrics: dict = {"awd": awd(real, synth)}
    if real.n_channels == 2:
        metrics["aed"] = aed(synth)
    metrics["matrix_similarity"] = pairwise_report(real, synth)
    out.json("metrics.json", metrics)
    # figure data: heatmaps and 2-D embeddings
    for a in range(real.n_channels):
        for b in range(a + 1, real.n_channels):
            rm = feature_corr_matrix(real, a, b)
            rm.to_csv(out.path(f"matrix_real_{a}_{b}.csv"))
            feature_corr_matrix(synth, a, b, keep=rm.feature_names).to_csv(out.path(f"matrix_synth_{a}_{b}.csv"))
    _embedding_csv(out, "pca.csv", [real, synth], pca_project([real, synth], 2))
    if cfg.experiment["tsne"]:
        emb = tsne_embed([real, synth], perplexity=cfg.experiment["perplexity"], seed=cfg.seed)
        _embedding_csv(out, "tsne.csv", [real, synth], emb)
    return 0


def _embedding_csv(out: Output, name: str, sets: list[MTSDataset], coords) -> None:
    rows = []
    for label, data, xy in zip(("real", "synth"), sets, coords):
        for i, (x, y) in enumerate(np.asarray(xy)[:, :2]):
            rows.append({"set": label, "instance": i, "x": float(x), "y": float(y)})
    out.csv(name, rows)


def _bench_cell(toy: ToySpec, gan: CosciConfig, seed: int, with_cd: bool, n_samples: int) -> dict:
    data, _ = generate_toy(toy)
    return toy_arm(data, gan, seed, with_cd, n_samples)


def _safe_cell(*cell) -> dict:
    try:
        return {"status": "ok", **_bench_cell(*cell)}
    except Exception as exc:  # a failing cell is reported, not fatal
        return {"status": "error", "error": f"{type(exc).__name__}: {exc}"}


def cmd_bench(cfg: RunConfig, args, out: Output) -> int:
    exp = cfg.experiment
    cells, keys = [], []
    for v in exp["variants"]:
        for s in cfg.seeds:
            for arm, with_cd in ARMS:
                cells.append((replace(cfg.toy, variant=Variant(v)), cfg.gan, s, with_cd, exp["n_samples"]))
                keys.append({"variant": v, "seed": s, "arm": arm})
    results = run_cells(_safe_cell, cells, args.jobs)
    rows = [{**k, **r} for k, r in zip(keys, results)]
    out.csv("bench.csv", rows)
    out.json("metrics.json", {"cells": rows})
    return 1 if any(r["status"] != "ok" for r in rows) else 0


def _toy_repro(cfg: RunConfig, args) -> list[dict]:
    exp = cfg.experiment
    return toy_trials(cfg.toy, cfg.gan, exp["variants"], cfg.seeds, exp["n_samples"], args.jobs)


def cmd_table1(cfg, args, out) -> int:
    trials = _toy_repro(cfg, args)
    rows = table1(trials)
    out.csv("table1.csv", rows)
    out.csv("trials.csv", trial_rows(trials))
    out.json("metrics.json", {"table1": rows, "trials": trials})
    return 0


def cmd_table2(cfg, args, out) -> int:
    trials = _toy_repro(cfg, args)
    rows = table2(trials)
    out.csv("table2.csv", rows)
    out.csv("trials.csv", trial_rows(trials))
    wins = [{"variant": t["variant"], "seed": t["seed"], **cd_wins(t)} for t in trials]
    out.json("metrics.json", {"table2": rows, "trials": trials, "cd_wins": wins})
    return 0


def cmd_table3(cfg, args, out) -> int:
    exp = cfg.experiment
    result = eeg_utility(
        cfg.eeg, cfg.gan, cfg.classifier, cfg.seeds, exp["channel_counts"], exp["augmentation_ratios"]
    )
    rows = table3(result)
    out.csv("table3.csv", rows)
    all_syn = [r for rep in result["all_synthetic"] for r in rep.rows()]
    out.csv("all_synthetic.csv", all_syn)
    aug = [r for rep in result["augmentation"] for r in rep.rows()]
    if aug:
        out.csv("augmentation.csv", aug)
    out.json(
        "metrics.json",
        {
            "frames": result["frames"],
            "table3": rows,
            "cd_wins": table3_wins(result),
            "all_synthetic": [rep.summary() for rep in result["all_synthetic"]],
            "augmentation": [rep.summary() for rep in result["augmentation"]],
        },
    )
    return 0


HANDLERS = {
    "gen-toy": cmd_gen_toy,
    "train": cmd_train,
    "sample": cmd_sample,
    "train-baseline": cmd_train_baseline,
    "eval": cmd_eval,
    "bench": cmd_bench,
    "repro-table1": cmd_table1,
    "repro-table2": cmd_table2,
    "repro-table3": cmd_table3,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coscigan", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"coscigan {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--seed", type=int, help="global seed (overrides the config file)")
        p.add_argument("--out", default=f"out/{name}", help="output directory")
        p.add_argument("--jobs", type=int, default=1, help="maximum worker processes")
        p.add_argument("--desk-scale", action="store_true", help="apply the reduced desk presets")
        if name in ("train", "train-baseline"):
            p.add_argument("--data", help="training CSV")
        if name == "sample":
            p.add_argument("--model", help="checkpoint written by train or train-baseline")
            p.add_argument("-n", type=int, help="number of instances")
        if name == "eval":
            p.add_argument("--real", help="real CSV")
            p.add_argument("--synth", help="synthetic CSV")
    return parser


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs: must be >= 1")
        raw = load_config_file(args.config) if args.config else {}
        cfg = resolve_config(raw, args.desk_scale, args.seed)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = Output(Path(args.out))
    status = 1
    try:
        status = HANDLERS[args.command](cfg, args, out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        status = 2
    except (CosciError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        status = 1
    finally:
        out.manifest(args.command, cfg, time.perf_counter() - started, "ok" if status == 0 else "failed")
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
