"""Declarative run configuration: one file, validated, echoed to outputs."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError


@dataclass
class ModelConfig:
    word_dim: int = 300
    pos_dim: int = 30
    position_dim: int = 10
    gru_hidden: int = 400
    hidden_dim: int = 400          # GCN / context dimension, also decoder hidden
    gcn_layers: int = 6
    edge_type_dim: int = 80
    decoder_layers: int = 3
    dropout: float = 0.2
    vocab_size: int = 50_000
    copy_only: bool = False
    pretrained_embeddings: str | None = None

    def validate(self) -> None:
        for name in ("word_dim", "pos_dim", "position_dim", "gru_hidden",
                     "hidden_dim", "gcn_layers", "edge_type_dim", "decoder_layers",
                     "vocab_size"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"model.{name} must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("model.dropout must lie in [0, 1)")

    @property
    def token_dim(self) -> int:
        return self.word_dim + self.pos_dim + self.position_dim


@dataclass
class TrainConfig:
    batch_size: int = 8            # benchmark scale uses 128
    learning_rate: float = 1e-3
    grad_clip: float = 0.2
    max_epochs: int = 20
    max_steps: int = 0             # 0 = no step cap
    eval_every: int = 50           # benchmark scale uses 2000
    patience: int = 3
    coverage_weight: float = 1.0
    log_clamp_threshold: float = -50.0

    def validate(self) -> None:
        for name in ("batch_size", "learning_rate", "grad_clip", "max_epochs",
                     "eval_every", "patience"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"train.{name} must be positive")


@dataclass
class InferenceConfig:
    beam_width: int = 100
    lambda1: float = 1.0
    lambda2: float = 0.1
    max_phrases: int = 10
    max_phrase_len: int = 6
    length_alpha: float = 1.0
    dp_unigram_weight: float = 0.5
    dp_bigram_weight: float = 0.5
    sp_log_rank: bool = False      # alternative reading: log(rank + 1)

    def validate(self) -> None:
        if self.beam_width < 1:
            raise ConfigError("infer.beam_width must be >= 1")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ConfigError("infer.lambda factors must be non-negative")
        if self.max_phrases < 1 or self.max_phrase_len < 1:
            raise ConfigError("infer.max_phrases and max_phrase_len must be >= 1")


@dataclass
class RunConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    infer: InferenceConfig = field(default_factory=InferenceConfig)
    train_file: str = ""
    valid_file: str = ""
    test_file: str = ""
    output_dir: str = "runs/out"
    seed: int = 1
    precision: str = "float32"     # float64 for gradient-check builds
    workers: int = 0               # 0 = logical cores

    def validate(self) -> None:
        self.model.validate()
        self.train.validate()
        self.infer.validate()
        if self.precision not in ("float32", "float64"):
            raise ConfigError(f"precision must be float32 or float64, got {self.precision!r}")
        if self.workers < 0:
            raise ConfigError("workers must be >= 0")


_SECTIONS = {"model": ModelConfig, "train": TrainConfig, "infer": InferenceConfig}


def _fields(cls) -> set[str]:
    return {f.name for f in dataclasses.fields(cls)}


def _coerce(value: str):
    """Parse a CLI override value with YAML scalar rules."""
    return yaml.safe_load(value)


def load_config(path: str | Path | None, overrides: list[str] | None = None) -> RunConfig:
    """Build a RunConfig from a YAML file plus dotted key=value overrides.

    Unknown keys anywhere are rejected.
    """
    raw: dict = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read config file {path}: {e}") from None
        loaded = yaml.safe_load(text) or {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {path} must contain a mapping")
        raw = loaded

    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, value = item.split("=", 1)
        target = raw
        parts = key.split(".")
        for part in parts[:-1]:
            target = target.setdefault(part, {})
            if not isinstance(target, dict):
                raise ConfigError(f"override {key!r} clashes with a scalar entry")
        target[parts[-1]] = _coerce(value)

    cfg = RunConfig()
    top_fields = _fields(RunConfig)
    for key, value in raw.items():
        if key in _SECTIONS:
            section_cls = _SECTIONS[key]
            section = getattr(cfg, key)
            if not isinstance(value, dict):
                raise ConfigError(f"section {key!r} must be a mapping")
            for k, v in value.items():
                if k not in _fields(section_cls):
                    raise ConfigError(f"unknown config key {key}.{k}")
                setattr(section, k, v)
        elif key in top_fields - set(_SECTIONS):
            setattr(cfg, key, value)
        else:
            raise ConfigError(f"unknown config key {key!r}")
    cfg.validate()
    return cfg


def echo_config(cfg: RunConfig, out_dir: str | Path) -> Path:
    """Write the effective configuration next to the outputs it produced."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "config_echo.yaml"
    path.write_text(yaml.safe_dump(dataclasses.asdict(cfg), sort_keys=True),
                    encoding="utf-8")
    return path
