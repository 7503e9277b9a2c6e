import itertools

import numpy as np
import pytest

from coscigan.dataset import (
    MTSDataset,
    SplitSpec,
    concat,
    events_from_mask,
    extract_event_windows,
    forward_select_channels,
    load_csv,
    save_csv,
    split,
    split_indices,
    zscore_flags,
    zscore_filter,
)
from coscigan.errors import ConfigError, DataError, ParseError, ShapeError


def _random(n, c, l, seed=0, labeled=False):
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, n) if labeled else None
    return MTSDataset(rng.standard_normal((n, c, l)), labels)


# ---------------------------------------------------------------- invariants


def test_dataset_invariants():
    with pytest.raises(ShapeError):
        MTSDataset(np.zeros((0, 1, 2)))
    with pytest.raises(ShapeError):
        MTSDataset(np.zeros((1, 1, 1)))
    with pytest.raises(DataError):
        MTSDataset(np.array([[[0.0, np.nan]]]))
    with pytest.raises(DataError):
        MTSDataset(np.zeros((2, 1, 2)), labels=[0, 2])
    with pytest.raises(ShapeError):
        MTSDataset(np.zeros((2, 1, 2)), labels=[0])


def test_values_are_read_only():
    ds = _random(2, 2, 3)
    with pytest.raises(ValueError):
        ds.values[0, 0, 0] = 1.0


def test_concat_rejects_mixed_labels():
    with pytest.raises(DataError):
        concat([_random(2, 1, 3), _random(2, 1, 3, labeled=True)])


# ----------------------------------------------------------------------- CSV


def test_load_layout(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("0,1,2,3\n")
    ds = load_csv(p, n_channels=2, length=2)
    np.testing.assert_array_equal(ds.values[0], [[0, 1], [2, 3]])


def test_empty_file_is_shape_error(tmp_path):
    p = tmp_path / "e.csv"
    p.write_text("")
    with pytest.raises(ShapeError):
        load_csv(p, 2, 2)


def test_save_body_format(tmp_path):
    p = tmp_path / "s.csv"
    save_csv(MTSDataset(np.array([[[5.0, -1.5]]])), p)
    lines = p.read_text().splitlines()
    assert lines[0] == "cosci-mts v1; channels=1; length=2; labeled=0"
    assert lines[1] == "5.0,-1.5"


@pytest.mark.parametrize("shape", [(4, 3, 10), (8, 5, 100)])
def test_round_trip(tmp_path, shape):
    ds = _random(*shape, seed=shape[0])
    p = tmp_path / "r.csv"
    save_csv(ds, p)
    back = load_csv(p)
    assert back.values.shape == shape
    assert np.max(np.abs(back.values - ds.values)) <= 1e-9


def test_labels_round_trip(tmp_path):
    ds = _random(6, 2, 4, labeled=True)
    p = tmp_path / "l.csv"
    save_csv(ds, p)
    np.testing.assert_array_equal(load_csv(p).labels, ds.labels)


def test_parse_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("0,1,2,3\n0,x,2,3\n")
    with pytest.raises(ParseError, match="row 1"):
        load_csv(p, 2, 2)
    p.write_text("0,1,2,3\n0,nan,2,3\n")
    with pytest.raises(DataError):
        load_csv(p, 2, 2)
    p.write_text("0,1,2,3\n0,1,2\n")
    with pytest.raises(ShapeError):
        load_csv(p, 2, 2)
    p.write_text("cosci-mts v1; channels=2; length=2; labeled=0\n0,1,2,3\n")
    with pytest.raises(ShapeError):
        load_csv(p, 1, 4)


# ------------------------------------------------------------------- z-score


def test_constant_channel_unchanged():
    ds = MTSDataset(np.full((3, 1, 5), 2.0))
    assert zscore_filter(ds, 3.0) is ds


def test_spike_replaced_by_interpolation():
    # a single 7-sample series cannot exceed |z| = sqrt(6); pooling with a
    # quiet second instance gives the spike enough leverage
    values = np.zeros((2, 1, 7))
    values[0, 0, 3] = 100.0
    out = zscore_filter(MTSDataset(values), 3.0)
    np.testing.assert_array_equal(out.values[0, 0], np.zeros(7))


def test_endpoint_outlier_clamps():
    values = np.zeros((3, 1, 6))
    values[0, 0] = [50.0, 1.0, 2.0, 3.0, 2.0, 1.0]
    out = zscore_filter(MTSDataset(values), 3.0)
    assert out.values[0, 0, 0] == 1.0


def test_flags_match_brute_force_scan():
    rng = np.random.default_rng(3)
    v = rng.standard_normal((4, 3, 200))
    v[rng.random(v.shape) < 0.01] *= 8
    ds = MTSDataset(v)
    flags = zscore_flags(ds, 3.0)
    count = 0
    for c in range(3):
        pool = [x for n in range(4) for x in v[n, c]]
        mu = sum(pool) / len(pool)
        sd = (sum((x - mu) ** 2 for x in pool) / len(pool)) ** 0.5
        count += sum(abs(x - mu) / sd > 3.0 for x in pool)
    assert flags.sum() == count


def test_threshold_must_be_positive():
    with pytest.raises(ConfigError):
        zscore_filter(_random(1, 1, 4), 0.0)


# --------------------------------------------------------------- windowing


def test_single_event_single_placement():
    # instance 1 is event-free and supplies the negative frame
    values = np.tile(np.arange(1000.0), (2, 1, 1))
    frames = extract_event_windows(MTSDataset(values), [(0, 300, 400)], window=800, margin=200)
    assert frames.labels.tolist() == [1, 0]
    start = frames.values[0, 0, 0]
    assert start <= 100 and start + 800 >= 600


def test_no_events_is_data_error():
    with pytest.raises(DataError):
        extract_event_windows(_random(1, 1, 50), [], 10, 2)


def _overlaps(a, b):
    return a[0] < b[1] and b[0] < a[1]


def test_planted_events_balanced_and_clear():
    T, window, margin = 3000, 100, 20
    ds = MTSDataset(np.arange(T, dtype=float).reshape(1, 1, T))
    starts = np.arange(10) * 280 + 50
    events = [(0, int(s), int(s) + 30) for s in starts]
    frames = extract_event_windows(ds, events, window, margin)
    assert frames.n_instances == 20
    assert frames.labels.sum() == 10
    spans = [(int(f[0, 0]), int(f[0, 0]) + window) for f in frames.values]
    for span, label in zip(spans, frames.labels):
        hits = [e for e in events if _overlaps(span, (e[1] - margin, e[2] + margin))]
        if label == 1:
            assert any(span[0] <= e[1] and e[2] <= span[1] for e in events)
        else:
            assert not hits


def test_events_from_mask():
    assert events_from_mask([0, 1, 1, 0, 1]) == [(1, 3), (4, 5)]


# ---------------------------------------------------------- forward select


def test_forward_select_full_permutation():
    ds = _random(4, 4, 5)
    chosen = forward_select_channels(ds, 4, lambda d: 0.0)
    assert sorted(chosen) == [0, 1, 2, 3]
    assert chosen == [0, 1, 2, 3]  # all ties go to the lowest index


def test_forward_select_forced_argmax():
    ds = MTSDataset(np.stack([np.full((2, 5), float(c)) for c in range(4)], axis=1))
    scorer = lambda d: 1.0 if np.any(d.values == 2.0) else 0.5  # noqa: E731
    assert forward_select_channels(ds, 1, scorer)[0] == 2


def test_forward_select_matches_exhaustive_oracle():
    rng = np.random.default_rng(0)
    labels = np.repeat([0, 1], 20)
    v = rng.standard_normal((40, 3, 10))
    v[:, 0] += labels[:, None] * 1.5

    def scorer(d):
        # nearest-class-mean accuracy on per-channel means
        f = d.values.mean(axis=2)
        mu0, mu1 = f[labels == 0].mean(0), f[labels == 1].mean(0)
        pred = np.sum((f - mu1) ** 2, 1) < np.sum((f - mu0) ** 2, 1)
        return float(np.mean(pred == labels))

    ds = MTSDataset(v, labels)
    chosen = forward_select_channels(ds, 2, scorer)
    singles = {c: scorer(ds.select_channels([c])) for c in range(3)}
    assert chosen[0] == max(singles, key=lambda c: (singles[c], -c)) == 0
    pairs = {p: scorer(ds.select_channels(list(p))) for p in itertools.permutations(range(3), 2) if p[0] == 0}
    assert (0, chosen[1]) == max(pairs, key=lambda p: (pairs[p], -p[1]))


# ------------------------------------------------------------------- split


def test_split_sizes_and_determinism():
    ds = _random(10, 1, 3)
    tr, te = split(ds, SplitSpec(0.8, 1))
    assert (tr.n_instances, te.n_instances) == (8, 2)
    a = split_indices(ds, SplitSpec(0.8, 5))
    b = split_indices(ds, SplitSpec(0.8, 5))
    np.testing.assert_array_equal(a[0], b[0])


def test_split_stratified():
    ds = MTSDataset(np.zeros((100, 1, 2)), np.repeat([0, 1], 50))
    tr_idx, te_idx = split_indices(ds, SplitSpec(0.8, 0))
    assert np.sum(ds.labels[tr_idx] == 0) == 40 and np.sum(ds.labels[tr_idx] == 1) == 40
    assert sorted(np.concatenate([tr_idx, te_idx])) == list(range(100))


def test_split_empty_side_is_config_error():
    with pytest.raises(ConfigError):
        split(_random(1, 1, 3), SplitSpec(0.5, 0))
    with pytest.raises(ConfigError):
        SplitSpec(1.0)
