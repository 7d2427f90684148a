"""Pipeline configuration file, run manifest, and atomic artifact writes.

The config is a YAML file with nested sections (``paths``, ``model``,
``train``, ``loss``, ``ensemble``). Unknown keys are rejected with their full
key path; the global seed is propagated into every seeded component unless a
section pins its own. A manifest recording the effective config hash, seed
and library versions accompanies every output directory.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .ensemble import SearchSpace
from .forest import RFConfig
from .fusion.config import LossSpec, ModelConfig, TrainConfig, preset

PACKAGE_VERSION = "0.1.0"

ENSEMBLE_METHODS = ("majority", "average", "rf")


class ConfigError(ValueError):
    """A pipeline config file is malformed; the message carries the key path."""


@dataclass(frozen=True)
class PathsConfig:
    """Input file locations. Only the paths a subcommand needs must be set."""
    train: str | None = None
    val: str | None = None
    test: str | None = None
    features: str | None = None
    lexicon: str | None = None
    hatexplain: str | None = None
    tags: str | None = None
    checkpoint: str | None = None
    predictions: tuple[str, ...] = ()
    stack_predictions: tuple[str, ...] = ()
    stack_labels: str | None = None


@dataclass(frozen=True)
class EnsembleConfig:
    method: str = "average"
    threshold: float = 0.5
    n_folds: int = 5
    budget: int = 10
    search: SearchSpace = field(default_factory=SearchSpace)
    rf: RFConfig | None = None  # fixed forest config; skips the random search

    def __post_init__(self):
        if self.method not in ENSEMBLE_METHODS:
            raise ConfigError(f"ensemble.method must be one of {ENSEMBLE_METHODS}, "
                              f"got {self.method!r}")
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigError("ensemble.threshold must be in [0, 1]")


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    out_dir: str = "out"
    preset: str | None = None
    paths: PathsConfig = field(default_factory=PathsConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    loss: LossSpec = field(default_factory=LossSpec)
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)


def _check_keys(section: dict, allowed, path: str) -> None:
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown config key: {path}{key}")


def _build_section(cls, data: dict, path: str, defaults: dict | None = None):
    fields = {f.name for f in dataclasses.fields(cls)}
    _check_keys(data, fields, path)
    merged = dict(defaults or {})
    merged.update(data)
    try:
        return cls(**merged)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config section {path.rstrip('.')}: {exc}") from exc


def _as_path_tuple(value, path: str) -> tuple[str, ...]:
    if value is None:
        return ()
    if isinstance(value, str):
        return (value,)
    if isinstance(value, (list, tuple)) and all(isinstance(v, str) for v in value):
        return tuple(value)
    raise ConfigError(f"{path} must be a path or list of paths")


def build_config(data: dict, overrides: dict | None = None) -> PipelineConfig:
    """Validate a parsed config mapping and apply flag overrides.

    Overrides (``seed``, ``out_dir``, ``preset``) take precedence over both
    the file and any preset; preset values seed the model/train/loss sections
    and explicit section keys win over the preset.
    """
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    top_level = ("seed", "out_dir", "preset", "paths", "model", "train", "loss", "ensemble")
    _check_keys(data, top_level, "")

    seed = overrides.get("seed", data.get("seed", 0))
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("seed must be an integer")
    out_dir = overrides.get("out_dir", data.get("out_dir", "out"))
    preset_name = overrides.get("preset", data.get("preset"))

    preset_defaults = {"model": {}, "train": {}, "loss": {}}
    if preset_name is not None:
        try:
            preset_defaults = preset(preset_name)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        preset_defaults["train"]["preset_name"] = preset_name

    paths_data = dict(data.get("paths") or {})
    for key in ("predictions", "stack_predictions"):
        if key in paths_data:
            paths_data[key] = _as_path_tuple(paths_data[key], f"paths.{key}")
    paths = _build_section(PathsConfig, paths_data, "paths.")

    model_defaults = dict(preset_defaults["model"])
    model_defaults.setdefault("seed", seed)
    model = _build_section(ModelConfig, dict(data.get("model") or {}),
                           "model.", model_defaults)
    train_defaults = dict(preset_defaults["train"])
    train_defaults.setdefault("seed", seed)
    train = _build_section(TrainConfig, dict(data.get("train") or {}),
                           "train.", train_defaults)
    loss = _build_section(LossSpec, dict(data.get("loss") or {}),
                          "loss.", preset_defaults["loss"])

    ens_data = dict(data.get("ensemble") or {})
    if "search" in ens_data:
        search_data = ens_data["search"] or {}
        fields = {f.name for f in dataclasses.fields(SearchSpace)}
        _check_keys(search_data, fields, "ensemble.search.")
        try:
            ens_data["search"] = SearchSpace(
                **{k: tuple(v) for k, v in search_data.items()})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid config section ensemble.search: {exc}") from exc
    if ens_data.get("rf") is not None:
        ens_data["rf"] = _build_section(RFConfig, dict(ens_data["rf"]),
                                        "ensemble.rf.", {"seed": seed})
    ensemble_cfg = _build_section(EnsembleConfig, ens_data, "ensemble.")

    return PipelineConfig(seed=seed, out_dir=str(out_dir), preset=preset_name,
                          paths=paths, model=model, train=train, loss=loss,
                          ensemble=ensemble_cfg)


def load_config(path, overrides: dict | None = None) -> PipelineConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return build_config(data, overrides)


def check_paths_exist(cfg: PipelineConfig, required: list[str]) -> None:
    """Verify that the named path fields are set and point at real files."""
    for name in required:
        value = getattr(cfg.paths, name)
        entries = value if isinstance(value, tuple) else (value,)
        if value is None or not entries:
            raise ConfigError(f"config is missing required path: paths.{name}")
        for entry in entries:
            if not os.path.exists(entry):
                raise ConfigError(f"paths.{name}: no such file: {entry}")


# -- manifest and atomic writes ----------------------------------------------

def config_digest(cfg: PipelineConfig) -> str:
    canonical = json.dumps(dataclasses.asdict(cfg), sort_keys=True, default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def atomic_write_text(path, text: str) -> None:
    """Write via a temp file in the target directory, then rename."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def atomic_write(path, writer) -> None:
    """Run ``writer(tmp_path)`` then rename the temp file over ``path``."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    writer(tmp)
    os.replace(tmp, path)


def write_manifest(out_dir, subcommand: str, cfg: PipelineConfig,
                   artifacts: list[str]) -> None:
    manifest = {
        "subcommand": subcommand,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "seed": cfg.seed,
        "config_sha256": config_digest(cfg),
        "preset": cfg.preset,
        "versions": {
            "package": PACKAGE_VERSION,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        "artifacts": sorted(artifacts),
    }
    atomic_write_text(Path(out_dir) / "manifest.json",
                      json.dumps(manifest, indent=2, sort_keys=True) + "\n")
