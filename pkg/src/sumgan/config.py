"""Training configuration: flat `key = value` files plus built-in profiles.

The `paper` profile is the full-scale setup (50k vocab, 256-d
embeddings, 512-d hidden states, batch 200); `desk` is a small profile
so the full pipeline runs in minutes.
"""

import hashlib
from dataclasses import dataclass, fields


@dataclass
class TrainingConfig:
    # model
    vocab_size: int = 50000
    d_emb: int = 256
    d_hid: int = 512
    src_limit: int = 200
    tgt_limit: int = 25
    # optimization
    batch_size: int = 200
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    clip_norm: float = 2.0
    mle_epochs: int = 30
    # discriminator
    disc_d_emb: int = 64
    disc_windows: str = "1,2,3,4"
    disc_kernels: int = 25
    disc_epochs: int = 10
    disc_batch_size: int = 32
    # adversarial phase
    lambda_disc: float = 0.7
    baseline_decay: float = 0.9
    n_rollouts: int = 16
    g_steps: int = 1
    d_steps: int = 5
    sync_interval: int = 1
    adv_rounds: int = 4
    samples_per_g_step: int = 8
    advantage_guard: float = 10.0
    # run
    seed: int = 0
    train_path: str = ""
    val_path: str = ""
    out_dir: str = "runs"

    def validate(self):
        for name in ("vocab_size", "d_emb", "d_hid", "batch_size", "n_rollouts"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.lambda_disc <= 1.0:
            raise ValueError("lambda_disc must be in [0, 1]")
        if not 0.0 <= self.baseline_decay < 1.0:
            raise ValueError("baseline_decay must be in [0, 1)")
        if self.src_limit < 1 or self.tgt_limit < 1:
            raise ValueError("truncation limits must be >= 1")
        return self

    @property
    def window_sizes(self):
        return tuple(int(w) for w in self.disc_windows.split(","))


PROFILES = {
    "paper": dict(vocab_size=50000, d_emb=256, d_hid=512, src_limit=200,
                  tgt_limit=25, batch_size=200),
    "desk": dict(vocab_size=2000, d_emb=64, d_hid=128, src_limit=30,
                 tgt_limit=10, batch_size=8, disc_d_emb=32, disc_kernels=8,
                 samples_per_g_step=4, n_rollouts=4),
}


def from_profile(name, **overrides):
    if name not in PROFILES:
        raise ValueError(f"unknown profile {name!r} (have: {', '.join(PROFILES)})")
    return TrainingConfig(**{**PROFILES[name], **overrides})


def render_config(cfg):
    out = []
    for f in fields(cfg):
        out.append(f"{f.name} = {getattr(cfg, f.name)}")
    return "\n".join(out) + "\n"


def parse_config(text):
    """Parse flat `key = value` text; `profile = NAME` applies a profile base."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected `key = value`")
        key, _, value = line.partition("=")
        raw[key.strip()] = value.strip()

    base = {}
    if "profile" in raw:
        base = dict(PROFILES[raw.pop("profile")])
    types = {f.name: f.type for f in fields(TrainingConfig)}
    kwargs = dict(base)
    for key, value in raw.items():
        if key not in types:
            raise ValueError(f"unknown config key {key!r}")
        t = types[key]
        kwargs[key] = int(value) if t is int else float(value) if t is float else value
    return TrainingConfig(**kwargs).validate()


def load_config(path):
    with open(path, encoding="utf-8") as f:
        return parse_config(f.read())


def config_hash(cfg):
    return hashlib.sha1(render_config(cfg).encode("utf-8")).hexdigest()[:16]
