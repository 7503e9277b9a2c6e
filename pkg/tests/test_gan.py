import json

import numpy as np
import pytest

from coscigan.dataset import MTSDataset
from coscigan.errors import ConfigError, CorruptFileError, ShapeError, VersionError
from coscigan.gan import (
    CosciConfig,
    CosciModel,
    JointModel,
    NoiseSource,
    load_model,
    sample,
    sample_baseline,
    save_model,
    train,
    train_baseline_joint,
)


def small_config(**kw):
    base = dict(n_channels=2, length=8, noise_len=4, batch_size=3, n_epochs=1, hidden_dim=4, seed=0)
    base.update(kw)
    return CosciConfig(**base)


def fixture(n=8, c=2, length=8, seed=0):
    rng = np.random.default_rng(seed)
    t = np.arange(length)
    amp = rng.uniform(0.3, 0.7, n)
    vals = amp[:, None, None] * np.sin(2 * np.pi * t / length)[None, None] * np.ones((1, c, 1))
    return MTSDataset(vals + 0.05 * rng.standard_normal((n, c, length)))


def all_params(model):
    return {f"{k}/{p}": v.copy() for k, net in model.networks().items() for p, v in net.params.values.items()}


# ------------------------------------------------------------------ config


def test_config_defaults_and_file_keys():
    cfg = CosciConfig()
    assert (cfg.noise_len, cfg.batch_size, cfg.n_epochs) == (32, 32, 100)
    assert (cfg.glr, cfg.dlr, cfg.cdlr, cfg.gamma) == (1e-3, 1e-3, 1e-4, 5.0)
    from_file = CosciConfig.from_dict({"withCD": False, "nepochs": 3, "Ngroups": 4, "nsamples": 50})
    assert (from_file.with_cd, from_file.n_epochs, from_file.n_channels, from_file.length) == (False, 3, 4, 50)
    assert CosciConfig.from_dict(from_file.to_file_dict()) == from_file


def test_config_rejections():
    with pytest.raises(ConfigError):
        CosciConfig.from_dict({"bogus": 1})
    with pytest.raises(ConfigError):
        CosciConfig.from_dict({"withCD": True, "with_cd": False})
    with pytest.raises(ConfigError, match="gamma"):
        CosciConfig(gamma=-1)
    with pytest.raises(ConfigError):
        CosciConfig(cd_type="GRU")


# ---------------------------------------------------------------- training


def test_zero_epochs_keeps_parameters():
    model = CosciModel(small_config(n_epochs=0))
    before = all_params(model)
    train(model, fixture())
    after = all_params(model)
    assert all(np.array_equal(before[k], after[k]) for k in before)
    assert model.epoch_log == []


@pytest.mark.parametrize("cd_type", ["MLP", "LSTM"])
def test_one_epoch_changes_every_parameter(cd_type):
    model = CosciModel(small_config(cd_type=cd_type))
    before = all_params(model)
    train(model, fixture())
    after = all_params(model)
    for k in before:
        assert np.all(before[k] != after[k]), k
    log = model.epoch_log[0]
    assert np.all(np.isfinite(log["d_loss"] + log["g_loss"] + [log["cd_loss"]]))
    assert len(log["d_loss"]) == 2


def test_mlp_channel_nets_train():
    model = CosciModel(small_config(lstm_g=False, lstm_d=False))
    train(model, fixture())
    assert np.all(np.isfinite(model.epoch_log[0]["g_loss"]))


def test_data_shape_mismatch():
    with pytest.raises(ConfigError):
        train(CosciModel(small_config(n_channels=3)), fixture())


def test_without_cd_gamma_has_no_effect():
    data = fixture()
    a = train(CosciModel(small_config(with_cd=False, gamma=0.0, n_epochs=2)), data)
    b = train(CosciModel(small_config(with_cd=False, gamma=5.0, n_epochs=2)), data)
    pa, pb = all_params(a), all_params(b)
    assert pa.keys() == pb.keys()
    assert all(pa[k].tobytes() == pb[k].tobytes() for k in pa)
    assert a.central_discriminator is None


def test_channel_independence_without_cd():
    data = fixture(seed=1)
    other = data.values.copy()
    other[:, 1] = np.random.default_rng(9).standard_normal(other[:, 1].shape)
    a = train(CosciModel(small_config(with_cd=False, n_epochs=2)), data)
    b = train(CosciModel(small_config(with_cd=False, n_epochs=2)), MTSDataset(other))
    for net in ("gen0", "disc0"):
        for p, v in a.networks()[net].params.values.items():
            assert v.tobytes() == b.networks()[net].params[p].tobytes()
    assert not np.array_equal(a.generators[1].params.flat(), b.generators[1].params.flat())


def test_generator_gradient_matches_combined_objective():
    """Finite-difference oracle for the generator step with a central discriminator.

    Generator 0's applied gradient must equal d/dtheta0 of
    loss(D0(G0(z))) + gamma * loss(CD([G0(z), G1(z)])) with D0 and the CD
    frozen at their post-update parameters and G1(z) held constant.
    """
    from coscigan.nn import bce_loss

    cfg = small_config(cd_type="LSTM", batch_size=8, gamma=2.5)
    model = CosciModel(cfg)
    g0, g1 = model.generators
    g1_before = g1.params.state()
    captured = {}
    orig_draw = model.noise.draw
    model.noise.draw = lambda n: captured.setdefault("z", orig_draw(n))
    opt0 = model.gen_opts[0]
    orig_step = opt0.step

    def spy_step():
        captured["theta"] = g0.params.flat().copy()
        captured["grad"] = g0.params.flat_grad().copy()
        orig_step()

    opt0.step = spy_step
    model.train_batch(fixture(seed=3).values)

    z = captured["z"]
    g1.params.load_state(g1_before)
    fake1 = g1.forward(z)

    def objective(theta):
        g0.params.set_flat(theta)
        f0 = g0.forward(z)
        l_d = bce_loss(model.channel_discriminators[0].forward(f0), np.ones(len(z)))
        both = np.stack([f0, fake1], axis=2)  # (B, L, C) for the LSTM CD
        l_cd = bce_loss(model.central_discriminator.forward(both), np.ones(len(z)))
        return l_d + cfg.gamma * l_cd

    theta = captured["theta"]
    rng = np.random.default_rng(0)
    h = 1e-6
    for j in rng.choice(theta.size, 25, replace=False):
        up, down = theta.copy(), theta.copy()
        up[j] += h
        down[j] -= h
        numeric = (objective(up) - objective(down)) / (2 * h)
        analytic = captured["grad"][j]
        assert abs(numeric - analytic) <= 1e-6 * max(1.0, abs(numeric)), j


def test_partial_final_batch_is_trained():
    model = CosciModel(small_config(batch_size=3))
    train(model, fixture(n=8))
    assert model.gen_opts[0].t == 3


def test_real_data_fraction_subsets():
    model = CosciModel(small_config(batch_size=2, real_data_fraction=0.5))
    train(model, fixture(n=8))
    assert model.gen_opts[0].t == 2


def test_minimax_and_mse_variants_run():
    for kw in (dict(generator_loss="minimax"), dict(criterion="MSE")):
        model = train(CosciModel(small_config(**kw)), fixture())
        assert np.all(np.isfinite(model.epoch_log[0]["g_loss"]))


# ----------------------------------------------------------------- sampling


def test_sampling_determinism_and_errors():
    model = CosciModel(small_config())
    a, b = sample(model, 5, seed=3), sample(model, 5, seed=3)
    assert a.values.tobytes() == b.values.tobytes()
    assert not np.array_equal(a.values, sample(model, 5, seed=4).values)
    with pytest.raises(ShapeError):
        sample(model, 0)


def test_zero_generators_emit_bias():
    model = CosciModel(small_config())
    for i, g in enumerate(model.generators):
        for v in g.params.values.values():
            v[...] = 0.0
        g.params["linear.bias"][...] = np.arange(8) + 10 * i
    out = sample(model, 4, seed=0).values
    for i in range(2):
        assert np.all(out[:, i] == np.arange(8) + 10 * i)


class RecordingNoise(NoiseSource):
    def __init__(self, noise_len, seed):
        super().__init__(noise_len, seed)
        self.calls = []

    def draw(self, n):
        z = super().draw(n)
        self.calls.append(z.copy())
        return z


def test_shared_noise_per_instance():
    model = CosciModel(small_config(n_channels=3))
    seen = {i: [] for i in range(3)}
    for i, g in enumerate(model.generators):
        orig = g.forward

        def wrapped(noise, *a, _orig=orig, _i=i, **k):
            seen[_i].append(np.array(noise, copy=True))
            return _orig(noise, *a, **k)

        g.forward = wrapped
    src = RecordingNoise(4, 0)
    sample(model, 7, noise_source=src)
    assert len(src.calls) == 1 and src.calls[0].shape == (7, 4)
    for i in range(3):
        assert len(seen[i]) == 1
        assert seen[i][0].tobytes() == src.calls[0].tobytes()


# ----------------------------------------------------------------- baseline


def test_baseline_matches_single_channel_shapes():
    cfg = small_config(n_channels=1, with_cd=False)
    joint = JointModel(cfg)
    cosci = CosciModel(cfg)
    shapes = lambda net: {k: v.shape for k, v in net.params.values.items()}  # noqa: E731
    assert shapes(joint.generator) == shapes(cosci.generators[0])
    assert shapes(joint.discriminator) == shapes(cosci.channel_discriminators[0])


def test_baseline_trains_and_is_deterministic():
    data = fixture()
    a = train_baseline_joint(small_config(), data)
    b = train_baseline_joint(small_config(), data)
    assert np.all(np.isfinite(a.epoch_log[0]["d_loss"] + a.epoch_log[0]["g_loss"]))
    assert sample_baseline(a, 4, 1).values.tobytes() == sample_baseline(b, 4, 1).values.tobytes()
    assert sample_baseline(a, 4, 1).values.shape == (4, 2, 8)


# -------------------------------------------------------------- checkpoints


@pytest.mark.parametrize("kind", ["cosci", "joint"])
def test_checkpoint_round_trip(tmp_path, kind):
    data = fixture()
    model = train(CosciModel(small_config()), data) if kind == "cosci" else train_baseline_joint(small_config(), data)
    path = tmp_path / "m.npz"
    save_model(model, path)
    back = load_model(path)
    pa, pb = all_params(model), all_params(back)
    assert all(np.array_equal(pa[k], pb[k]) for k in pa)
    assert back.config == model.config and back.epoch_log == model.epoch_log
    draw = sample if kind == "cosci" else sample_baseline
    assert draw(model, 6, 2).values.tobytes() == draw(back, 6, 2).values.tobytes()


def test_checkpoint_corrupt_and_version(tmp_path):
    model = CosciModel(small_config())
    path = tmp_path / "m.npz"
    save_model(model, path)
    blob = path.read_bytes()
    (tmp_path / "t.npz").write_bytes(blob[: len(blob) // 2])
    with pytest.raises(CorruptFileError):
        load_model(tmp_path / "t.npz")
    with np.load(path) as npz:
        arrays = {k: npz[k] for k in npz.files}
    meta = json.loads(str(arrays["__meta__"]))
    meta["version"] = "cosci-ckpt-0"
    arrays["__meta__"] = np.array(json.dumps(meta))
    np.savez(tmp_path / "v.npz", **arrays)
    with pytest.raises(VersionError):
        load_model(tmp_path / "v.npz")
