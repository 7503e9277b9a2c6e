"""Channel GANs sharing one latent vector, tied together by a central discriminator.

Per batch the update order is: every channel discriminator, then the central
discriminator, then every generator. Generator ``i`` minimises
``loss(D_i(G_i(z))) + gamma * loss(CD(G_1(z), ..., G_C(z)))`` where only
channel ``i``'s slice of the central-discriminator input carries gradient
back to ``G_i``; the other channels enter as constants.

A single-generator joint GAN over all channels is provided as the baseline.
"""
from __future__ import annotations

import json
import zipfile
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Callable

import numpy as np

from .dataset import MTSDataset
from .errors import ConfigError, CorruptFileError, NumericError, ShapeError, VersionError
from .nn import (
    CRITERIA,
    Adam,
    LstmDiscriminator,
    LstmGenerator,
    MlpDiscriminator,
    MlpDiscSpec,
    MlpGenerator,
    Network,
)

CHECKPOINT_VERSION = "cosci-ckpt-1"

# config-file key -> CosciConfig field
FILE_KEYS = {
    "criterion": "criterion",
    "CD_type": "cd_type",
    "LSTMG": "lstm_g",
    "LSTMD": "lstm_d",
    "withCD": "with_cd",
    "nepochs": "n_epochs",
    "batch_size": "batch_size",
    "glr": "glr",
    "dlr": "dlr",
    "cdlr": "cdlr",
    "real_data_fraction": "real_data_fraction",
    "gamma": "gamma",
    "noise_len": "noise_len",
    "nsamples": "length",
    "Ngroups": "n_channels",
}


@dataclass
class CosciConfig:
    n_channels: int = 2
    length: int = 800
    noise_len: int = 32
    batch_size: int = 32
    n_epochs: int = 100
    glr: float = 1e-3
    dlr: float = 1e-3
    cdlr: float = 1e-4
    gamma: float = 5.0
    with_cd: bool = True
    cd_type: str = "MLP"
    lstm_g: bool = True
    lstm_d: bool = True
    criterion: str = "BCE"
    generator_loss: str = "non_saturating"
    hidden_dim: int = 256
    num_layers: int = 1
    noise_mode: str = "sequence"
    real_data_fraction: float = 1.0
    seed: int = 0

    def __post_init__(self):
        problems = []
        if self.n_channels < 1 or self.length < 2 or self.noise_len < 1:
            problems.append("n_channels >= 1, length >= 2 and noise_len >= 1 required")
        if self.batch_size < 1 or self.n_epochs < 0:
            problems.append("batch_size >= 1 and n_epochs >= 0 required")
        if self.gamma < 0:
            problems.append("gamma must be >= 0")
        if self.cd_type not in ("MLP", "LSTM"):
            problems.append(f"CD_type must be MLP or LSTM, not {self.cd_type!r}")
        if self.criterion not in CRITERIA:
            problems.append(f"criterion must be one of {sorted(CRITERIA)}")
        if self.generator_loss not in ("non_saturating", "minimax"):
            problems.append("generator_loss must be non_saturating or minimax")
        if self.noise_mode not in ("sequence", "vector"):
            problems.append("noise_mode must be sequence or vector")
        if not 0.0 < self.real_data_fraction <= 1.0:
            problems.append("real_data_fraction must be in (0, 1]")
        if min(self.glr, self.dlr, self.cdlr) <= 0:
            problems.append("learning rates must be positive")
        if problems:
            raise ConfigError("; ".join(problems))

    @classmethod
    def from_dict(cls, d: dict) -> "CosciConfig":
        """Accepts config-file key names (``withCD``, ``nepochs``...) or field names."""
        names = {f.name for f in fields(cls)}
        kwargs = {}
        for key, value in d.items():
            name = FILE_KEYS.get(key, key)
            if name not in names:
                raise ConfigError(f"unknown config key {key!r}")
            if name in kwargs:
                raise ConfigError(f"config key {key!r} given twice")
            kwargs[name] = value
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_file_dict(self) -> dict:
        inverse = {v: k for k, v in FILE_KEYS.items()}
        return {inverse.get(k, k): v for k, v in asdict(self).items()}


def derive_seed(seed: int, *path: int) -> int:
    """Independent, stable child seed for a named role."""
    return int(np.random.SeedSequence([seed, *path]).generate_state(1)[0])


# stream / network roles for derive_seed
_NOISE, _SHUFFLE, _DROPOUT, _SUBSET = 1, 2, 3, 4
_GEN, _DISC, _CD = 10, 20, 30


class NoiseSource:
    """Standard-normal latent vectors; one row per instance."""

    def __init__(self, noise_len: int, seed: int):
        self.noise_len = noise_len
        self.rng = np.random.default_rng(seed)

    def draw(self, n: int) -> np.ndarray:
        return self.rng.standard_normal((n, self.noise_len))


def _make_generator(cfg: CosciConfig, out_len: int, seed: int) -> Network:
    if cfg.lstm_g:
        return LstmGenerator(
            cfg.noise_len, out_len, cfg.hidden_dim, cfg.num_layers, cfg.noise_mode, seed=seed
        )
    return MlpGenerator(cfg.noise_len, out_len, (cfg.hidden_dim, cfg.hidden_dim), seed=seed)


def _make_discriminator(cfg: CosciConfig, input_dim: int, length: int, seed: int) -> Network:
    if cfg.lstm_d:
        return LstmDiscriminator(input_dim, cfg.hidden_dim, cfg.num_layers, seed=seed)
    return MlpDiscriminator(MlpDiscSpec(input_dim * length, dropout_p=0.0), seed=seed)


def _disc_input(net: Network, x: np.ndarray) -> np.ndarray:
    """Shape a (B, C, L) batch for a discriminator: (B, L[, C]) for LSTMs, flat for MLPs."""
    if isinstance(net, LstmDiscriminator):
        return x[:, 0] if x.shape[1] == 1 else x.transpose(0, 2, 1)
    return x.reshape(x.shape[0], -1)


def _disc_grad_to_batch(net: Network, d: np.ndarray, shape) -> np.ndarray:
    if isinstance(net, LstmDiscriminator):
        return d.reshape(shape) if shape[1] == 1 else d.transpose(0, 2, 1)
    return d.reshape(shape)


class _Trainable:
    """Shared plumbing: config, seeded streams, epoch log."""

    config: CosciConfig
    epoch_log: list[dict]

    def _streams(self):
        cfg = self.config
        self.noise = NoiseSource(cfg.noise_len, derive_seed(cfg.seed, _NOISE))
        self._shuffle_rng = np.random.default_rng(derive_seed(cfg.seed, _SHUFFLE))
        self._dropout_rng = np.random.default_rng(derive_seed(cfg.seed, _DROPOUT))

    def networks(self) -> dict[str, Network]:
        raise NotImplementedError

    def optimizers(self) -> dict[str, Adam]:
        raise NotImplementedError

    def _gen_loss(self, p: np.ndarray) -> tuple[float, np.ndarray]:
        crit = CRITERIA[self.config.criterion]
        if self.config.generator_loss == "non_saturating":
            return crit(p, 1.0)
        value, grad = crit(p, 0.0)
        return -value, -grad

    def _disc_step(self, net, opt, real_in, fake_in, training=False):
        crit = CRITERIA[self.config.criterion]
        B = real_in.shape[0]
        net.zero_grad()
        p = net.forward(np.concatenate([real_in, fake_in]), training=training, rng=self._dropout_rng)
        l_real, g_real = crit(p[:B], 1.0)
        l_fake, g_fake = crit(p[B:], 0.0)
        net.backward(np.concatenate([g_real, g_fake]))
        opt.step()
        return l_real + l_fake


class CosciModel(_Trainable):
    def __init__(self, config: CosciConfig):
        self.config = cfg = config
        C, L = cfg.n_channels, cfg.length
        self.generators = [_make_generator(cfg, L, derive_seed(cfg.seed, _GEN, i)) for i in range(C)]
        self.channel_discriminators = [
            _make_discriminator(cfg, 1, L, derive_seed(cfg.seed, _DISC, i)) for i in range(C)
        ]
        if cfg.with_cd:
            cd_seed = derive_seed(cfg.seed, _CD)
            if cfg.cd_type == "MLP":
                self.central_discriminator = MlpDiscriminator(MlpDiscSpec(C * L), seed=cd_seed)
            else:
                self.central_discriminator = LstmDiscriminator(C, cfg.hidden_dim, cfg.num_layers, seed=cd_seed)
        else:
            self.central_discriminator = None
        self.gen_opts = [Adam(g.params, cfg.glr) for g in self.generators]
        self.disc_opts = [Adam(d.params, cfg.dlr) for d in self.channel_discriminators]
        self.cd_opt = Adam(self.central_discriminator.params, cfg.cdlr) if cfg.with_cd else None
        self.epoch_log = []
        self._streams()

    def networks(self) -> dict[str, Network]:
        nets = {f"gen{i}": g for i, g in enumerate(self.generators)}
        nets.update({f"disc{i}": d for i, d in enumerate(self.channel_discriminators)})
        if self.central_discriminator is not None:
            nets["cd"] = self.central_discriminator
        return nets

    def optimizers(self) -> dict[str, Adam]:
        opts = {f"gen{i}": o for i, o in enumerate(self.gen_opts)}
        opts.update({f"disc{i}": o for i, o in enumerate(self.disc_opts)})
        if self.cd_opt is not None:
            opts["cd"] = self.cd_opt
        return opts

    def train_batch(self, real: np.ndarray) -> dict:
        cfg = self.config
        C = cfg.n_channels
        B = real.shape[0]
        z = self.noise.draw(B)
        fakes = np.stack([g.forward(z) for g in self.generators], axis=1)

        d_losses = []
        for i, (d, opt) in enumerate(zip(self.channel_discriminators, self.disc_opts)):
            d_losses.append(
                self._disc_step(d, opt, _disc_input(d, real[:, i : i + 1]), _disc_input(d, fakes[:, i : i + 1]))
            )

        cd_loss = 0.0
        d_cd = None
        if cfg.with_cd:
            cd = self.central_discriminator
            cd_loss = self._disc_step(
                cd, self.cd_opt, _disc_input(cd, real), _disc_input(cd, fakes), training=True
            )
            p = cd.forward(_disc_input(cd, fakes), training=True, rng=self._dropout_rng)
            g_cd_loss, dp = self._gen_loss(p)
            d_cd = _disc_grad_to_batch(cd, cd.backward(dp, param_grads=False), fakes.shape)

        g_losses = []
        for i, (g, d, opt) in enumerate(zip(self.generators, self.channel_discriminators, self.gen_opts)):
            p = d.forward(_disc_input(d, fakes[:, i : i + 1]))
            loss, dp = self._gen_loss(p)
            dfake = _disc_grad_to_batch(d, d.backward(dp, param_grads=False), (B, 1, cfg.length))[:, 0]
            if d_cd is not None:
                loss += cfg.gamma * g_cd_loss
                dfake = dfake + cfg.gamma * d_cd[:, i]
            g.zero_grad()
            g.backward(dfake)
            opt.step()
            g_losses.append(loss)
        return {"d_loss": d_losses, "g_loss": g_losses, "cd_loss": cd_loss}

    def generate(self, noise: np.ndarray) -> np.ndarray:
        """(n, C, L) samples; every channel is driven by the same noise row."""
        return np.stack([g.forward(noise) for g in self.generators], axis=1)


class JointModel(_Trainable):
    """One generator emitting all C*L values and one discriminator over the full instance."""

    def __init__(self, config: CosciConfig):
        self.config = cfg = config
        C, L = cfg.n_channels, cfg.length
        self.generator = _make_generator(cfg, C * L, derive_seed(cfg.seed, _GEN, 0))
        self.discriminator = _make_discriminator(cfg, C, L, derive_seed(cfg.seed, _DISC, 0))
        self.gen_opt = Adam(self.generator.params, cfg.glr)
        self.disc_opt = Adam(self.discriminator.params, cfg.dlr)
        self.epoch_log = []
        self._streams()

    def networks(self) -> dict[str, Network]:
        return {"gen0": self.generator, "disc0": self.discriminator}

    def optimizers(self) -> dict[str, Adam]:
        return {"gen0": self.gen_opt, "disc0": self.disc_opt}

    def train_batch(self, real: np.ndarray) -> dict:
        B = real.shape[0]
        d = self.discriminator
        fakes = self.generate(self.noise.draw(B))
        d_loss = self._disc_step(d, self.disc_opt, _disc_input(d, real), _disc_input(d, fakes))
        p = d.forward(_disc_input(d, fakes))
        g_loss, dp = self._gen_loss(p)
        dfake = _disc_grad_to_batch(d, d.backward(dp, param_grads=False), fakes.shape)
        self.generator.zero_grad()
        self.generator.backward(dfake.reshape(B, -1))
        self.gen_opt.step()
        return {"d_loss": [d_loss], "g_loss": [g_loss], "cd_loss": 0.0}

    def generate(self, noise: np.ndarray) -> np.ndarray:
        out = self.generator.forward(noise)
        return out.reshape(out.shape[0], self.config.n_channels, self.config.length)


def _check_data(model: _Trainable, data: MTSDataset) -> None:
    cfg = model.config
    if data.n_channels != cfg.n_channels or data.length != cfg.length:
        raise ConfigError(
            f"data is {data.n_channels} channels x {data.length} steps, "
            f"model expects {cfg.n_channels} x {cfg.length}"
        )


def _fit(model: _Trainable, data: MTSDataset, callback: Callable[[dict], None] | None = None):
    _check_data(model, data)
    cfg = model.config
    values = data.values
    if cfg.real_data_fraction < 1.0:
        rng = np.random.default_rng(derive_seed(cfg.seed, _SUBSET))
        keep = max(1, int(round(cfg.real_data_fraction * len(values))))
        values = values[np.sort(rng.permutation(len(values))[:keep])]
    n = len(values)
    start_epoch = len(model.epoch_log)
    for epoch in range(start_epoch, start_epoch + cfg.n_epochs):
        order = model._shuffle_rng.permutation(n)
        totals = None
        n_batches = 0
        for b, lo in enumerate(range(0, n, cfg.batch_size)):
            stats = model.train_batch(values[order[lo : lo + cfg.batch_size]])
            flat = [*stats["d_loss"], *stats["g_loss"], stats["cd_loss"]]
            if not np.all(np.isfinite(flat)):
                raise NumericError(f"non-finite loss at epoch {epoch}, batch {b}")
            if totals is None:
                totals = {k: np.array(v, dtype=np.float64) for k, v in stats.items()}
            else:
                for k, v in stats.items():
                    totals[k] += v
            n_batches += 1
        entry = {"epoch": epoch}
        entry.update({k: (v / n_batches).tolist() for k, v in totals.items()})
        model.epoch_log.append(entry)
        if callback is not None:
            callback(entry)
    return model


def train(model: CosciModel, data: MTSDataset, callback=None) -> CosciModel:
    """Run ``config.n_epochs`` epochs of shuffled mini-batch training in place."""
    return _fit(model, data, callback)


def train_baseline_joint(config: CosciConfig, data: MTSDataset, callback=None) -> JointModel:
    return _fit(JointModel(config), data, callback)


def _sample(model: _Trainable, n: int, seed: int, noise_source: NoiseSource | None, chunk: int = 512) -> MTSDataset:
    if n < 1:
        raise ShapeError("sample count must be >= 1")
    source = noise_source or NoiseSource(model.config.noise_len, seed)
    parts = []
    for lo in range(0, n, chunk):
        parts.append(model.generate(source.draw(min(chunk, n - lo))))
    return MTSDataset(np.concatenate(parts))


def sample(model: CosciModel, n: int, seed: int = 0, noise_source: NoiseSource | None = None) -> MTSDataset:
    return _sample(model, n, seed, noise_source)


def sample_baseline(model: JointModel, n: int, seed: int = 0, noise_source: NoiseSource | None = None) -> MTSDataset:
    return _sample(model, n, seed, noise_source)


# ----------------------------------------------------------------- checkpoints


def save_model(model: _Trainable, path) -> None:
    kind = "joint" if isinstance(model, JointModel) else "cosci"
    meta = {
        "version": CHECKPOINT_VERSION,
        "kind": kind,
        "config": model.config.to_dict(),
        "epoch_log": model.epoch_log,
    }
    arrays = {"__meta__": np.array(json.dumps(meta))}
    for net_name, net in model.networks().items():
        for p_name, value in net.params.values.items():
            arrays[f"{net_name}/{p_name}"] = value
    for opt_name, opt in model.optimizers().items():
        arrays[f"adam/{opt_name}/t"] = np.array(opt.t)
        for p_name in opt.m:
            arrays[f"adam/{opt_name}/m/{p_name}"] = opt.m[p_name]
            arrays[f"adam/{opt_name}/v/{p_name}"] = opt.v[p_name]
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_model(path) -> CosciModel | JointModel:
    try:
        with np.load(Path(path), allow_pickle=False) as npz:
            arrays = {k: npz[k] for k in npz.files}
        meta = json.loads(str(arrays.pop("__meta__")))
    except (zipfile.BadZipFile, OSError, ValueError, KeyError, EOFError) as exc:
        raise CorruptFileError(f"cannot read checkpoint {path}: {exc}") from exc
    if meta.get("version") != CHECKPOINT_VERSION:
        raise VersionError(f"checkpoint version {meta.get('version')!r} != {CHECKPOINT_VERSION!r}")
    config = CosciConfig(**meta["config"])
    model = JointModel(config) if meta["kind"] == "joint" else CosciModel(config)
    try:
        for net_name, net in model.networks().items():
            prefix = f"{net_name}/"
            net.params.load_state(
                {k[len(prefix):]: v for k, v in arrays.items() if k.startswith(prefix)}
            )
        for opt_name, opt in model.optimizers().items():
            p = f"adam/{opt_name}/"
            opt.load_state(
                {
                    "t": arrays[p + "t"],
                    "m": {k: arrays[f"{p}m/{k}"] for k in opt.m},
                    "v": {k: arrays[f"{p}v/{k}"] for k in opt.v},
                }
            )
    except (KeyError, ShapeError) as exc:
        raise CorruptFileError(f"checkpoint {path} is missing or has mismatched arrays: {exc}") from exc
    model.epoch_log = meta["epoch_log"]
    return model
