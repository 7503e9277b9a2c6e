import numpy as np
import pytest

from coscigan.dataset import load_csv
from coscigan.errors import ConfigError
from coscigan.toygen import ToySpec, Variant, anomaly_span, generate_toy, write_toy


def test_analytic_sine_values():
    spec = ToySpec(n_per_type=1, length=100, noise_sd=0.0, amp_sd=1e-15, seed=0)
    data, _ = generate_toy(spec)
    x = data.values[0, 0]
    assert x[0] == 0.0
    assert x[25] == pytest.approx(0.4, abs=1e-12)


def test_shape_labels_and_shared_amplitude():
    data, truth = generate_toy(ToySpec(n_per_type=5, length=50, noise_sd=0.0, seed=1))
    assert data.values.shape == (10, 2, 50)
    np.testing.assert_array_equal(data.labels, [0] * 5 + [1] * 5)
    np.testing.assert_array_equal(truth.patient_type, [1] * 5 + [2] * 5)
    # noise-free: each channel's peak over full cycles recovers the same A
    t = np.arange(50)
    for n in range(10):
        a1 = data.values[n, 0] @ np.sin(2 * np.pi * 0.01 * t) / np.sum(np.sin(2 * np.pi * 0.01 * t) ** 2)
        assert a1 == pytest.approx(truth.amplitude[n], rel=1e-12)


def test_same_seed_bitwise_identical():
    a, _ = generate_toy(ToySpec(Variant.ANOMALY, n_per_type=4, length=40, seed=7))
    b, _ = generate_toy(ToySpec(Variant.ANOMALY, n_per_type=4, length=40, seed=7))
    assert a.values.tobytes() == b.values.tobytes()


def test_freq_change_doubles_frequency():
    L = 800
    data, _ = generate_toy(ToySpec(Variant.FREQ_CHANGE, n_per_type=1, length=L, noise_sd=0.0))
    x = data.values[0, 0]
    first, second = x[: L // 2], x[L // 2 :]
    k1 = np.argmax(np.abs(np.fft.rfft(first))[1:]) + 1
    k2 = np.argmax(np.abs(np.fft.rfft(second))[1:]) + 1
    assert k2 == 2 * k1
    # phase continuity: no jump larger than a regular step
    steps = np.abs(np.diff(x))
    assert steps[L // 2 - 1] <= steps.max() + 1e-12


def test_anomaly_middle_is_noise():
    L = 800
    data, _ = generate_toy(ToySpec(Variant.ANOMALY, n_per_type=64, length=L, seed=3))
    lo, hi = anomaly_span(L)
    assert (lo, hi) == (300, 500)
    mid = data.values[:, :, lo:hi]
    assert abs(mid.var() / 0.05**2 - 1) < 0.3
    t = np.arange(lo, hi)
    wave = np.sin(2 * np.pi * 0.01 * t)
    r = np.corrcoef(mid[:, 0].mean(axis=0), wave)[0, 1]
    assert abs(r) < 0.2


def test_spec_validation():
    with pytest.raises(ConfigError):
        ToySpec(amp_sd=0.0)
    with pytest.raises(ConfigError):
        ToySpec(freq_ch1=-1.0)
    with pytest.raises(ValueError):
        ToySpec(variant="Square")


def test_write_toy_sidecar(tmp_path):
    spec = ToySpec(n_per_type=2, length=10, seed=0)
    data, truth = write_toy(spec, tmp_path / "d.csv", tmp_path / "t.csv")
    back = load_csv(tmp_path / "d.csv")
    np.testing.assert_array_equal(back.labels, data.labels)
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "instance,patient_type,amplitude"
    assert float(lines[1].split(",")[2]) == truth.amplitude[0]
