"""Seeded experiment pipelines behind the table-reproduction commands.

A toy trial trains one model with and one without the central
discriminator on the same data and seed, then scores both against the real
set. The amplitude metrics and the matrix similarities come from the same
pair of runs.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from typing import Any, Callable, Sequence

import numpy as np

from .dataset import MTSDataset
from .downstream import (
    ClassifierSpec,
    SamplerCache,
    gan_factory,
    run_all_synthetic,
    run_augmentation,
    run_trts_tstr,
)
from .eegsim import EegSimSpec, blink_frames
from .gan import CosciConfig, CosciModel, derive_seed, sample, train
from .metrics import aed, awd, feature_corr_matrix, matrix_similarity
from .toygen import ToySpec, Variant, generate_toy

SIMILARITY_KEYS = ("mae", "frobenius", "spearman_rho", "kendall_tau")
ARMS = (("with_cd", True), ("without_cd", False))

# Reduced presets behind --desk-scale. Channel nets are MLPs because LSTM
# channel nets at this data size are both slow and prone to collapse.
DESK_GAN = {"nepochs": 30, "batch_size": 4, "cdlr": 1e-3, "LSTMG": False, "LSTMD": False}
DESK_TOY = {"n_per_type": 128, "length": 200}
DESK_EEG = {"n_channels": 5, "n_blinks": 256}
DESK_CLASSIFIER = {"hidden_dim": 32, "epochs": 20, "batch_size": 8, "lr": 3e-3}
DESK_EXPERIMENT = {"augmentation_ratios": [], "channel_counts": [4, 5]}


def run_cells(fn: Callable[..., Any], cells: Sequence[tuple], jobs: int = 1) -> list:
    """Apply ``fn`` to each argument tuple, in order, on up to ``jobs`` processes."""
    if jobs <= 1 or len(cells) <= 1:
        return [fn(*c) for c in cells]
    with ProcessPoolExecutor(max_workers=min(jobs, len(cells))) as pool:
        return list(pool.map(fn, *zip(*cells)))


# ---------------------------------------------------------------- toy tables


def toy_arm(data: MTSDataset, gan: CosciConfig, seed: int, with_cd: bool, n_samples: int) -> dict:
    """Train one model on two-channel data and score it."""
    cfg = replace(gan, n_channels=data.n_channels, length=data.length, with_cd=with_cd, seed=seed)
    model = train(CosciModel(cfg), data)
    synth = sample(model, n_samples, seed=derive_seed(seed, 90))
    real_m = feature_corr_matrix(data, 0, 1)
    synth_m = feature_corr_matrix(synth, 0, 1, keep=real_m.feature_names)
    row = {"awd": awd(data, synth), "aed": aed(synth)}
    row.update(matrix_similarity(real_m, synth_m))
    return row


def toy_trial(toy: ToySpec, gan: CosciConfig, seed: int, n_samples: int) -> dict:
    data, _ = generate_toy(toy)
    out = {"variant": toy.variant.value, "seed": seed}
    for arm, with_cd in ARMS:
        out[arm] = toy_arm(data, gan, seed, with_cd, n_samples)
    return out


def cd_wins(trial: dict) -> dict[str, bool]:
    """Per-metric verdict: does the with-CD arm match the real matrix better?"""
    cd, no = trial["with_cd"], trial["without_cd"]
    return {
        "mae": cd["mae"] < no["mae"],
        "frobenius": cd["frobenius"] < no["frobenius"],
        "spearman_rho": cd["spearman_rho"] > no["spearman_rho"],
        "kendall_tau": cd["kendall_tau"] > no["kendall_tau"],
    }


def toy_trials(
    toy: ToySpec, gan: CosciConfig, variants: Sequence[str], seeds: Sequence[int], n_samples: int, jobs: int = 1
) -> list[dict]:
    cells = [(replace(toy, variant=Variant(v)), gan, s, n_samples) for v in variants for s in seeds]
    return run_cells(toy_trial, cells, jobs)


def _median(trials: list[dict], arm: str, key: str) -> float:
    return float(np.median([t[arm][key] for t in trials]))


def table1(trials: list[dict]) -> list[dict]:
    """Median AWD/AED per variant and arm."""
    rows = []
    for variant in dict.fromkeys(t["variant"] for t in trials):
        sub = [t for t in trials if t["variant"] == variant]
        for arm, _ in ARMS:
            rows.append(
                {"variant": variant, "arm": arm, "awd": _median(sub, arm, "awd"), "aed": _median(sub, arm, "aed"),
                 "n_seeds": len(sub)}
            )
    return rows


def table2(trials: list[dict]) -> list[dict]:
    """Median matrix similarity per variant and arm, plus per-seed win counts."""
    rows = []
    for variant in dict.fromkeys(t["variant"] for t in trials):
        sub = [t for t in trials if t["variant"] == variant]
        seeds_all_four = sum(all(cd_wins(t).values()) for t in sub)
        for arm, _ in ARMS:
            row = {"variant": variant, "arm": arm}
            row.update({k: _median(sub, arm, k) for k in SIMILARITY_KEYS})
            row["seeds_cd_wins_all_four"] = seeds_all_four
            row["n_seeds"] = len(sub)
            rows.append(row)
    return rows


def trial_rows(trials: list[dict]) -> list[dict]:
    """Flat per-(variant, seed, arm) rows for CSV output."""
    rows = []
    for t in trials:
        for arm, _ in ARMS:
            row = {"variant": t["variant"], "seed": t["seed"], "arm": arm}
            row.update(t[arm])
            rows.append(row)
    return rows


# ------------------------------------------------------- downstream utility


def eeg_utility(
    eeg: EegSimSpec,
    gan: CosciConfig,
    classifier: ClassifierSpec,
    seeds: Sequence[int],
    channel_counts: Sequence[int],
    augmentation_ratios: Sequence[tuple[int, int]] = (),
) -> dict:
    """TRTF/TFTR with and without the central discriminator, then the
    all-synthetic (and optionally augmentation) experiments.

    Fitted per-class models are shared between protocols through one cache,
    so a (method, channels, seed) model is trained once.
    """
    real = blink_frames(eeg)
    cache = SamplerCache()
    trts = {}
    for method in ("cosci_cd", "cosci_no_cd"):
        trts[method] = run_trts_tstr(real, gan_factory(method, gan), classifier, seeds, method, cache)
    repeats = len(seeds)
    if list(seeds) != list(range(repeats)):
        # the grid protocols index their cells 0..repeats-1
        cache = SamplerCache()
    factories = {m: gan_factory(m, gan) for m in ("cosci_cd", "baseline")}
    all_syn = run_all_synthetic(real, factories, channel_counts, classifier, repeats, cache)
    augmentation = []
    if augmentation_ratios:
        augmentation = run_augmentation(
            real, factories, channel_counts, classifier, [tuple(r) for r in augmentation_ratios], repeats, cache
        )
    return {"frames": real.n_instances, "trts": trts, "all_synthetic": all_syn, "augmentation": augmentation}


def table3(result: dict) -> list[dict]:
    rows = []
    for method, reports in result["trts"].items():
        for proto, rep in reports.items():
            rows.append({"protocol": proto, "method": method, "mean": rep.mean, "sd": rep.sd, "median": rep.median,
                         "accuracies": list(rep.accuracies)})
    return rows


def table3_wins(result: dict) -> dict[str, int]:
    """Seeds where the with-CD accuracy beats the without-CD accuracy, per direction."""
    cd, no = result["trts"]["cosci_cd"], result["trts"]["cosci_no_cd"]
    return {p: int(sum(a > b for a, b in zip(cd[p].accuracies, no[p].accuracies))) for p in ("TRTF", "TFTR")}
