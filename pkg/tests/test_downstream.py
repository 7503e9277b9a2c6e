from dataclasses import replace

import numpy as np
import pytest

from coscigan.dataset import MTSDataset, SplitSpec, split, split_indices
from coscigan.downstream import (
    AUGMENTATION_RATIOS,
    ClassifierSpec,
    ClassSamplers,
    SamplerCache,
    UtilityReport,
    copy_factory,
    evaluate,
    fit_and_score,
    gan_factory,
    run_all_synthetic,
    run_augmentation,
    run_trts_tstr,
    train_classifier,
)
from coscigan.errors import DataError
from coscigan.gan import CosciConfig, derive_seed

FAST = ClassifierSpec(hidden_dim=6, epochs=4, batch_size=8, lr=1e-2, seed=0)


def separable(n=40, c=2, length=12, seed=0, gap=1.0):
    rng = np.random.default_rng(seed)
    labels = np.repeat([0, 1], n // 2)
    v = 0.3 * rng.standard_normal((n, c, length)) + (labels * 2 - 1)[:, None, None] * gap
    return MTSDataset(v, labels)


class Constant:
    def __init__(self, label):
        self.label = label

    def predict(self, data):
        return np.full(data.n_instances, self.label)


class Oracle:
    def predict(self, data):
        return data.labels.copy()


# ---------------------------------------------------------------- classifier


def test_separable_fixture_is_learned():
    tr, val = split(separable(80, seed=1), SplitSpec(0.8, 0))
    clf = train_classifier(ClassifierSpec(hidden_dim=8, epochs=15, batch_size=8, lr=1e-2), tr, val)
    assert max(clf.val_history) >= 0.95
    assert evaluate(clf, val) >= 0.95


def test_zero_epochs_returns_untrained_net():
    data = separable(40, gap=0.0, seed=2)
    tr, val = split(data, SplitSpec(0.5, 0))
    clf = train_classifier(ClassifierSpec(hidden_dim=6, epochs=0), tr, val)
    assert clf.val_history == []
    assert 0.3 <= evaluate(clf, val) <= 0.7


def test_classifier_determinism_and_best_state_kept():
    tr, val = split(separable(40, seed=3), SplitSpec(0.8, 0))
    a = train_classifier(FAST, tr, val)
    b = train_classifier(FAST, tr, val)
    assert a.net.params.flat().tobytes() == b.net.params.flat().tobytes()
    assert evaluate(a, val) == max(a.val_history)


def test_classifier_input_errors():
    data = separable(20)
    with pytest.raises(DataError):
        train_classifier(FAST, data.class_subset(1), data)
    with pytest.raises(DataError):
        train_classifier(FAST, MTSDataset(data.values), data)


def test_evaluate_reference_classifiers():
    data = separable(20)
    assert evaluate(Constant(1), data) == 0.5
    assert evaluate(Oracle(), data) == 1.0


def test_evaluate_matches_confusion_matrix():
    data = separable(30, seed=4)
    tr, te = split(data, SplitSpec(0.6, 1))
    clf = train_classifier(FAST, tr, te)
    pred = clf.predict(te)
    tp = np.sum((pred == 1) & (te.labels == 1))
    tn = np.sum((pred == 0) & (te.labels == 0))
    assert evaluate(clf, te) == (tp + tn) / te.n_instances


def test_shuffled_labels_give_chance():
    data = separable(120, seed=5)
    tr, te = split(data, SplitSpec(0.5, 2))
    clf = train_classifier(FAST, tr, tr)
    rng = np.random.default_rng(0)
    shuffled = te.with_labels(rng.permutation(te.labels))
    acc = evaluate(clf, shuffled)
    sigma = np.sqrt(0.25 / te.n_instances)
    assert abs(acc - 0.5) < 3 * sigma


# ----------------------------------------------------------------- protocols


def test_class_samplers_need_both_classes():
    data = separable(20)
    with pytest.raises(DataError):
        ClassSamplers(data.class_subset(0), copy_factory, 0)


def test_copy_factory_trts_equals_real_accuracy():
    data = separable(60, seed=6)
    reports = run_trts_tstr(data, copy_factory, FAST, seeds=[0, 1], method="copy")
    for proto in ("TRTF", "TFTR"):
        r = reports[proto]
        assert r.seeds == [0, 1] and all(0 <= a <= 1 for a in r.accuracies)
    # copied data is real data, so both directions score like train-on-real
    for seed, trtf in zip([0, 1], reports["TRTF"].accuracies):
        idx_tr, idx_te = split_indices(data, SplitSpec(0.8, seed))
        assert not set(idx_tr) & set(idx_te)
        assert trtf >= 0.9


def test_reports_are_deterministic():
    data = separable(40, seed=7)
    a = run_trts_tstr(data, copy_factory, FAST, seeds=[0], method="copy")
    b = run_trts_tstr(data, copy_factory, FAST, seeds=[0], method="copy")
    assert a["TRTF"].accuracies == b["TRTF"].accuracies and a["TFTR"].accuracies == b["TFTR"].accuracies


def test_all_synthetic_protocol_completeness():
    data = separable(40, c=3, seed=8)
    reports = run_all_synthetic(data, {"copy": copy_factory}, [2, 3], FAST, repeats=2)
    arms = {(r.method, r.n_channels) for r in reports}
    assert arms == {("real", 2), ("copy", 2), ("real", 3), ("copy", 3)}
    assert all(len(r.accuracies) == 2 and r.protocol == "AllSynthetic" for r in reports)


def test_augmentation_rows_and_zero_ratio():
    data = separable(40, seed=9)
    ratios = [(1, 0), (1, 1)]
    cache = SamplerCache()
    reports = run_augmentation(data, {"copy": copy_factory}, [2], FAST, ratios=ratios, repeats=2, cache=cache)
    assert len(reports) == 2
    rows = [row for r in reports for row in r.rows()]
    assert len(rows) == 2 * 2
    assert {row["ratio"] for row in rows} == {"1:0", "1:1"}
    # ratio 1:0 is the real-only control with the same validation split
    zero = next(r for r in reports if r.augmentation_ratio == (1, 0))
    for seed, acc in zip(zero.seeds, zero.accuracies):
        tr, te = split(data, SplitSpec(0.8, seed))
        real_tr, real_val = split(tr, SplitSpec(0.8, derive_seed(seed, 7)))
        clf = train_classifier(replace(FAST, seed=derive_seed(seed, 8)), real_tr, real_val)
        assert evaluate(clf, te) == acc


def test_default_ratios():
    assert AUGMENTATION_RATIOS == ((1, 1), (1, 2), (1, 4), (1, 6), (1, 8), (1, 10))


def test_utility_report_stats():
    r = UtilityReport("TRTF", "cosci_cd", 5, seeds=[0, 1, 2], accuracies=[0.5, 0.7, 0.9])
    assert r.mean == pytest.approx(0.7) and r.median == 0.7
    assert r.sd == pytest.approx(0.2)
    assert r.summary()["mean"] == pytest.approx(0.7)


def test_gan_factory_runs_tiny_models():
    data = separable(16, length=8, seed=10)
    cfg = CosciConfig(noise_len=4, batch_size=4, n_epochs=1, hidden_dim=4, lstm_g=False, lstm_d=False)
    for method in ("cosci_cd", "cosci_no_cd", "baseline"):
        sampler = gan_factory(method, cfg)(data.class_subset(1), seed=0)
        out = sampler(5, 1)
        assert out.values.shape == (5, 2, 8)
    with pytest.raises(ValueError):
        gan_factory("timegan", cfg)


def test_fit_and_score_range():
    data = separable(40, seed=11)
    tr, te = split(data, SplitSpec(0.8, 0))
    assert 0.0 <= fit_and_score(FAST, tr, te, seed=0) <= 1.0
