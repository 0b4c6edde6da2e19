"""Run configuration: defaults, key=value config files, CLI overrides, and
the config hash embedded in every artifact.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields
from pathlib import Path


class ConfigError(ValueError):
    """Unknown key, bad value, or unreadable config file."""


@dataclass
class RunConfig:
    dataset_kind: str = "generic"
    input: str = ""
    out: str = "run"
    seed: int = 13
    test_fraction: float = 0.2
    threshold: float = 1.0
    window: int = 5
    embedding: str = "fallback:100"  # fallback:<dim> or file:<path>
    match_split: str = "train"  # train | all
    candidate_pool: str = "top"  # top | all token positions
    dedup_per_sentence: bool = False
    quota: int = 10
    l2_doc: float = 1.0
    l2_word: float = 1.0
    max_iter: int = 500
    tol: float = 1e-8
    folds: int = 10
    step: int = 1
    metric: str = "auc"
    class_filter: str = "both"  # both | pos | neg
    group_words: str = "auto"  # auto | spurious | top
    labels: str = ""  # optional external labels csv; default <out>/labels.csv
    lexicon_pos: str = ""
    lexicon_neg: str = ""

    def validate(self) -> None:
        if self.match_split not in ("train", "all"):
            raise ConfigError(f"match_split must be train or all, got {self.match_split!r}")
        if self.candidate_pool not in ("top", "all"):
            raise ConfigError(f"candidate_pool must be top or all, got {self.candidate_pool!r}")
        if self.metric not in ("auc", "accuracy"):
            raise ConfigError(f"metric must be auc or accuracy, got {self.metric!r}")
        if self.class_filter not in ("both", "pos", "neg"):
            raise ConfigError(f"class_filter must be both, pos or neg, got {self.class_filter!r}")
        if self.group_words not in ("auto", "spurious", "top"):
            raise ConfigError(f"group_words must be auto, spurious or top, got {self.group_words!r}")
        if not self.embedding.startswith(("fallback:", "file:")):
            raise ConfigError(f"embedding must be fallback:<dim> or file:<path>, got {self.embedding!r}")
        if self.embedding.startswith("fallback:"):
            try:
                int(self.embedding.split(":", 1)[1])
            except ValueError:
                raise ConfigError(f"bad fallback dimension in {self.embedding!r}")

    @property
    def embedding_kind(self) -> str:
        return self.embedding.split(":", 1)[0]

    @property
    def embedding_arg(self) -> str:
        return self.embedding.split(":", 1)[1]


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _parse_value(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    raw = raw.strip()
    if kind == "bool":
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    if kind == "int":
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {raw!r}")
    if kind == "float":
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{key}: expected a number, got {raw!r}")
    return raw


def load_config_file(path: str | Path) -> dict:
    """Parse `key = value` lines; # starts a comment."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    values: dict = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"{path} line {lineno}: expected key = value")
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{path} line {lineno}: unknown config key {key!r}")
        values[key] = _parse_value(key, raw)
    return values


def build_config(file_values: dict | None = None, overrides: dict | None = None) -> RunConfig:
    """Precedence: overrides (flags) > file values > defaults."""
    cfg = RunConfig()
    for source in (file_values or {}, overrides or {}):
        for key, value in source.items():
            if value is None:
                continue
            if key not in _FIELD_TYPES:
                raise ConfigError(f"unknown config key {key!r}")
            setattr(cfg, key, value)
    cfg.validate()
    return cfg


def config_hash(cfg: RunConfig) -> str:
    """Stable digest over every field except the output directory."""
    parts = [
        f"{f.name}={getattr(cfg, f.name)!r}"
        for f in fields(RunConfig)
        if f.name != "out"
    ]
    return hashlib.sha256("\n".join(parts).encode("utf-8")).hexdigest()[:16]
