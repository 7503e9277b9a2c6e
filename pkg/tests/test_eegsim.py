import numpy as np

from coscigan.dataset import zscore_filter, zscore_flags
from coscigan.eegsim import EegSimSpec, blink_frames, simulate_recording

SMALL = EegSimSpec(n_channels=4, n_blinks=30, window=32, margin=4, blink_width=(8, 12), seed=1)


def test_recording_shape_and_events():
    rec, events = simulate_recording(SMALL)
    assert rec.values.shape[:2] == (1, 4)
    assert len(events) == 30
    assert all(e > s for _, s, e in events)
    starts = [s for _, s, _ in events]
    assert starts == sorted(starts)


def test_blink_is_common_across_channels_in_gain_order():
    spec = EegSimSpec(n_channels=3, n_blinks=40, gains=(1.0, 0.5, 0.0), artifact_rate=0.0, spike_rate=0.0,
                      alpha_amp=0.0, seed=2)
    rec, events = simulate_recording(spec)
    x = rec.values[0]
    inside = np.zeros(x.shape[1], bool)
    for _, s, e in events:
        inside[s:e] = True
    # variance added by blinks scales with the squared gain
    excess = x[:, inside].var(axis=1) - x[:, ~inside].var(axis=1)
    assert excess[0] > excess[1] > 0
    assert abs(excess[2]) < 0.2


def test_frames_are_balanced_and_deterministic():
    a, b = blink_frames(SMALL), blink_frames(SMALL)
    assert a.values.tobytes() == b.values.tobytes()
    counts = np.bincount(a.labels)
    assert counts[0] == counts[1] > 0
    assert a.values.shape[1:] == (4, 32)


def test_spikes_are_removed():
    spec = EegSimSpec(n_channels=4, n_blinks=60, spike_rate=1e-3, seed=3)
    rec, _ = simulate_recording(spec)
    assert np.abs(rec.values).max() > spec.spike_amp / 2
    assert zscore_flags(rec, 3.0).sum() > 0
    cleaned = zscore_filter(rec, 3.0)
    assert np.abs(cleaned.values).max() < spec.spike_amp / 2
