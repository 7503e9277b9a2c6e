"""Downstream utility of synthetic data for a binary frame classifier.

Class-labelled synthetic sets come from one generative model per class.
Protocols:

* ``TRTF`` / ``TFTR``: train on real, test on fake, and the reverse;
* ``AllSynthetic``: classifier sees only synthetic frames, tested on held-out real;
* ``Augmentation``: real training frames plus ``k`` times as many synthetic ones.

Every cell splits the real frames 80/20 with its seed; the 20% test part is
never shown to a GAN or a classifier during training.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Protocol, Sequence

import numpy as np

from .dataset import MTSDataset, SplitSpec, concat, split, split_indices
from .errors import DataError
from .gan import CosciConfig, CosciModel, derive_seed, sample, sample_baseline, train, train_baseline_joint
from .nn import Adam, LstmDiscriminator, bce

Sampler = Callable[[int, int], MTSDataset]


@dataclass(frozen=True)
class ClassifierSpec:
    hidden_dim: int = 256
    layers: int = 1
    epochs: int = 30
    batch_size: int = 32
    lr: float = 1e-3
    seed: int = 0


class Classifier:
    """LSTM over per-timestep channel vectors, linear -> sigmoid head."""

    def __init__(self, n_channels: int, spec: ClassifierSpec):
        self.spec = spec
        self.net = LstmDiscriminator(n_channels, spec.hidden_dim, spec.layers, seed=spec.seed)
        self.val_history: list[float] = []

    @staticmethod
    def _inputs(data: MTSDataset) -> np.ndarray:
        return data.values.transpose(0, 2, 1)

    def predict_proba(self, data: MTSDataset, chunk: int = 256) -> np.ndarray:
        x = self._inputs(data)
        return np.concatenate([self.net.forward(x[i : i + chunk]) for i in range(0, len(x), chunk)])

    def predict(self, data: MTSDataset) -> np.ndarray:
        return (self.predict_proba(data) >= 0.5).astype(np.int64)


def _require_labels(data: MTSDataset, what: str) -> None:
    if not data.labeled:
        raise DataError(f"{what} set must be labeled")


def train_classifier(spec: ClassifierSpec, train_set: MTSDataset, val_set: MTSDataset) -> Classifier:
    """Mini-batch BCE training; parameters with the best validation accuracy are kept."""
    _require_labels(train_set, "training")
    _require_labels(val_set, "validation")
    if len(np.unique(train_set.labels)) < 2:
        raise DataError("training set contains a single class")
    clf = Classifier(train_set.n_channels, spec)
    opt = Adam(clf.net.params, spec.lr)
    rng = np.random.default_rng(derive_seed(spec.seed, 99))
    x = Classifier._inputs(train_set)
    y = train_set.labels.astype(np.float64)
    best_acc, best_state = -1.0, clf.net.params.state()
    for _ in range(spec.epochs):
        order = rng.permutation(len(x))
        for lo in range(0, len(x), spec.batch_size):
            idx = order[lo : lo + spec.batch_size]
            clf.net.zero_grad()
            p = clf.net.forward(x[idx])
            _, grad = bce(p, y[idx])
            clf.net.backward(grad)
            opt.step()
        acc = evaluate(clf, val_set)
        clf.val_history.append(acc)
        if acc > best_acc:
            best_acc, best_state = acc, clf.net.params.state()
    clf.net.params.load_state(best_state)
    return clf


def evaluate(classifier, test_set: MTSDataset) -> float:
    """Fraction of correct 0.5-thresholded predictions."""
    _require_labels(test_set, "test")
    if test_set.n_instances == 0:
        raise DataError("empty test set")
    return float(np.mean(classifier.predict(test_set) == test_set.labels))


def fit_and_score(spec: ClassifierSpec, train_set: MTSDataset, test_set: MTSDataset, seed: int) -> float:
    """Train with an internal 80/20 train/validation split, return test accuracy."""
    tr, val = split(train_set, SplitSpec(0.8, derive_seed(seed, 7)))
    clf = train_classifier(replace(spec, seed=derive_seed(seed, 8)), tr, val)
    return evaluate(clf, test_set)


# ------------------------------------------------------------ generative side


class ModelFactory(Protocol):
    def __call__(self, data: MTSDataset, seed: int) -> Sampler: ...


METHODS = ("cosci_cd", "cosci_no_cd", "baseline")


def gan_factory(method: str, config: CosciConfig) -> ModelFactory:
    """Factory training one generative model of the given method on a dataset."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")

    def fit(data: MTSDataset, seed: int) -> Sampler:
        cfg = replace(config, n_channels=data.n_channels, length=data.length, seed=seed)
        if method == "baseline":
            model = train_baseline_joint(cfg, data)
            return lambda n, s: sample_baseline(model, n, s)
        model = train(CosciModel(replace(cfg, with_cd=method == "cosci_cd")), data)
        return lambda n, s: sample(model, n, s)

    return fit


def copy_factory(data: MTSDataset, seed: int) -> Sampler:
    """Degenerate 'generator' that replays real instances (a sanity control)."""
    rng = np.random.default_rng(seed)

    def draw(n: int, s: int) -> MTSDataset:
        idx = np.random.default_rng(s).integers(0, data.n_instances, n) if n > data.n_instances else rng.permutation(data.n_instances)[:n]
        return MTSDataset(data.values[np.sort(idx)])

    return draw


class ClassSamplers:
    """One fitted generative model per label class."""

    def __init__(self, data: MTSDataset, factory: ModelFactory, seed: int):
        _require_labels(data, "training")
        self.samplers = {}
        for c in (0, 1):
            if not np.any(data.labels == c):
                raise DataError(f"class {c} absent from training data")
            self.samplers[c] = factory(data.class_subset(c), derive_seed(seed, 50, c))

    def synthesize(self, counts: dict[int, int], seed: int) -> MTSDataset:
        parts = []
        for c, n in counts.items():
            if n > 0:
                d = self.samplers[c](n, derive_seed(seed, 60, c))
                parts.append(d.with_labels(np.full(n, c)))
        return concat(parts)


def class_counts(data: MTSDataset) -> dict[int, int]:
    return {c: int(np.sum(data.labels == c)) for c in (0, 1)}


@dataclass
class UtilityReport:
    protocol: str
    method: str
    n_channels: int
    augmentation_ratio: tuple[int, int] | None = None
    seeds: list[int] = field(default_factory=list)
    accuracies: list[float] = field(default_factory=list)

    @property
    def mean(self) -> float:
        return float(np.mean(self.accuracies)) if self.accuracies else float("nan")

    @property
    def sd(self) -> float:
        return float(np.std(self.accuracies, ddof=1)) if len(self.accuracies) > 1 else 0.0

    @property
    def median(self) -> float:
        return float(np.median(self.accuracies)) if self.accuracies else float("nan")

    def rows(self) -> list[dict]:
        return [
            {
                "protocol": self.protocol,
                "method": self.method,
                "n_channels": self.n_channels,
                "ratio": None if self.augmentation_ratio is None else f"{self.augmentation_ratio[0]}:{self.augmentation_ratio[1]}",
                "seed": s,
                "accuracy": a,
            }
            for s, a in zip(self.seeds, self.accuracies)
        ]

    def summary(self) -> dict:
        d = asdict(self)
        d.update(mean=self.mean, sd=self.sd, median=self.median)
        return d


class SamplerCache:
    """Memoises fitted per-class models by (method, channels, seed)."""

    def __init__(self):
        self._store: dict[tuple, ClassSamplers] = {}

    def get(self, key: tuple, build: Callable[[], ClassSamplers]) -> ClassSamplers:
        if key not in self._store:
            self._store[key] = build()
        return self._store[key]


def _cell_split(real: MTSDataset, seed: int) -> tuple[MTSDataset, MTSDataset]:
    tr_idx, te_idx = split_indices(real, SplitSpec(0.8, seed))
    assert not np.intersect1d(tr_idx, te_idx).size
    return real.subset(tr_idx), real.subset(te_idx)


def run_trts_tstr(
    real: MTSDataset,
    factory: ModelFactory,
    spec: ClassifierSpec,
    seeds: Sequence[int],
    method: str = "custom",
    cache: SamplerCache | None = None,
) -> dict[str, UtilityReport]:
    """Train-on-real/test-on-fake and train-on-fake/test-on-real accuracies per seed."""
    _require_labels(real, "real")
    cache = cache or SamplerCache()
    reports = {p: UtilityReport(p, method, real.n_channels) for p in ("TRTF", "TFTR")}
    for seed in seeds:
        train_set, test_set = _cell_split(real, seed)
        models = cache.get((method, real.n_channels, seed), lambda: ClassSamplers(train_set, factory, seed))
        fake = models.synthesize(class_counts(train_set), seed)
        trtf = fit_and_score(spec, train_set, fake, seed)
        fake_tr, fake_val = split(fake, SplitSpec(0.8, derive_seed(seed, 7)))
        clf = train_classifier(replace(spec, seed=derive_seed(seed, 8)), fake_tr, fake_val)
        tftr = evaluate(clf, test_set)
        for proto, acc in (("TRTF", trtf), ("TFTR", tftr)):
            reports[proto].seeds.append(seed)
            reports[proto].accuracies.append(acc)
    return reports


def run_all_synthetic(
    real: MTSDataset,
    factories: dict[str, ModelFactory],
    channel_counts: Sequence[int],
    spec: ClassifierSpec,
    repeats: int = 5,
    cache: SamplerCache | None = None,
) -> list[UtilityReport]:
    """Classifier trained only on synthetic frames, tested on held-out real.

    Uses the first ``k`` channels of ``real`` for each ``k``; a ``real``
    control arm trains on the real training split instead.
    """
    _require_labels(real, "real")
    cache = cache or SamplerCache()
    reports = []
    for k in channel_counts:
        data = real.select_channels(range(k))
        arms = {"real": UtilityReport("AllSynthetic", "real", k)}
        arms.update({m: UtilityReport("AllSynthetic", m, k) for m in factories})
        for seed in range(repeats):
            train_set, test_set = _cell_split(data, seed)
            arms["real"].seeds.append(seed)
            arms["real"].accuracies.append(fit_and_score(spec, train_set, test_set, seed))
            for method, factory in factories.items():
                models = cache.get((method, k, seed), lambda: ClassSamplers(train_set, factory, seed))
                fake = models.synthesize(class_counts(train_set), seed)
                fake_tr, fake_val = split(fake, SplitSpec(0.8, derive_seed(seed, 7)))
                clf = train_classifier(replace(spec, seed=derive_seed(seed, 8)), fake_tr, fake_val)
                arms[method].seeds.append(seed)
                arms[method].accuracies.append(evaluate(clf, test_set))
        reports.extend(arms.values())
    return reports


AUGMENTATION_RATIOS = ((1, 1), (1, 2), (1, 4), (1, 6), (1, 8), (1, 10))


def run_augmentation(
    real: MTSDataset,
    factories: dict[str, ModelFactory],
    channel_counts: Sequence[int],
    spec: ClassifierSpec,
    ratios: Sequence[tuple[int, int]] = AUGMENTATION_RATIOS,
    repeats: int = 5,
    cache: SamplerCache | None = None,
) -> list[UtilityReport]:
    """Real training frames plus synthetic ones at real:synthetic = a:b.

    Validation uses 20% of the real training split; the classifier trains
    on the remaining real frames and ``b/a`` times as many synthetic frames.
    A ratio with ``b = 0`` reproduces the real-only control.
    """
    _require_labels(real, "real")
    cache = cache or SamplerCache()
    reports = []
    for k in channel_counts:
        data = real.select_channels(range(k))
        arms = {(m, r): UtilityReport("Augmentation", m, k, tuple(r)) for m in factories for r in ratios}
        for seed in range(repeats):
            train_set, test_set = _cell_split(data, seed)
            real_tr, real_val = split(train_set, SplitSpec(0.8, derive_seed(seed, 7)))
            for method, factory in factories.items():
                models = cache.get((method, k, seed), lambda: ClassSamplers(train_set, factory, seed))
                for a, b in ratios:
                    counts = {c: int(round(n * b / a)) for c, n in class_counts(real_tr).items()}
                    parts = [real_tr]
                    if sum(counts.values()):
                        parts.append(models.synthesize(counts, derive_seed(seed, 70, b)))
                    clf = train_classifier(replace(spec, seed=derive_seed(seed, 8)), concat(parts), real_val)
                    arms[(method, (a, b))].seeds.append(seed)
                    arms[(method, (a, b))].accuracies.append(evaluate(clf, test_set))
        reports.extend(arms.values())
    return reports
