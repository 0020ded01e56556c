"""Experiment configuration: TOML schema, defaults and validation.

Example (every key is optional)::

    seed = 0
    image_size = 28
    methods = ["random_sampling", "random_projection", "pca"]
    k_grid = [16, 32, 64, 128, 256, 512, 784]
    classifiers = ["linear_svm", "random_forest"]
    gallery_count = 2
    save_matrices = false

    [data]
    source = "synth"            # "synth" or "images"
    path = "data/yaleb"         # image tree, CIFAR batches or .rbds cache
    external_path = "data/cifar-10-batches-bin"

    [split]
    classes_per_side = 19
    train_fraction = 0.75

    [flags]
    center = false
    clip_reconstruction = false
    rp_variance_mode = "standard"
    regression_intercept = false
    attacker_row_cap = 20000

    [train]
    svm_c = 1.0
    rf_trees = 100

    [[attacks]]
    name = "attack1"
    kind = "pinv"

    [[attacks]]
    name = "attack2"
    kind = "regression"
    dataset = "train"           # "train", "sub" or "external"

Environment overrides: ``RECONBENCH_OUT_DIR`` and ``RECONBENCH_JOBS``.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .attack import DEFAULT_ROW_CAP, AttackKind, AttackerType
from .classify import ClassifierKind, TrainConfig
from .reduction import Method, VarianceMode

ATTACKER_BINDINGS = {"train": AttackerType.TYPE1, "external": AttackerType.TYPE2, "sub": None}


def default_k_grid(d: int) -> list[int]:
    if d == 784:
        return [16, 32, 64, 128, 256, 512, 784]
    grid = [k for k in (2**i for i in range(1, 20)) if k < d]
    return grid + [d]


@dataclass
class DataConfig:
    source: str = "synth"
    path: str | None = None
    format: str = "auto"
    external_path: str | None = None
    external_format: str = "auto"
    synth_classes: int = 38
    synth_per_class: int = 64
    synth_snr: float = 5.0
    external_count: int = 2000


@dataclass
class SplitConfig:
    class_partition_seed: int = 0
    classes_per_side: int | None = None
    train_fraction: float = 0.75
    train_test_seed: int = 0


@dataclass
class FlagsConfig:
    center: bool = False
    clip_reconstruction: bool = False
    rp_variance_mode: str = "standard"
    regression_intercept: bool = False
    attacker_row_cap: int = DEFAULT_ROW_CAP


@dataclass
class AttackConfig:
    name: str
    kind: str
    dataset: str | None = None

    @property
    def attacker_type(self) -> AttackerType | None:
        return ATTACKER_BINDINGS.get(self.dataset) if self.dataset else None


def default_attacks() -> list[AttackConfig]:
    return [
        AttackConfig("attack1", "pinv"),
        AttackConfig("attack2", "regression", "train"),
        AttackConfig("attack3", "regression", "external"),
        AttackConfig("attack4", "regression", "sub"),
    ]


@dataclass
class ExperimentConfig:
    seed: int = 0
    image_size: int = 28
    methods: list[str] = field(default_factory=lambda: [m.value for m in Method])
    k_grid: list[int] | None = None
    classifiers: list[str] = field(
        default_factory=lambda: [ClassifierKind.LINEAR_SVM.value, ClassifierKind.RANDOM_FOREST.value]
    )
    attacks: list[AttackConfig] = field(default_factory=default_attacks)
    gallery_count: int = 2
    save_matrices: bool = False
    output_dir: str = "results"
    jobs: int = 1
    data: DataConfig = field(default_factory=DataConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    flags: FlagsConfig = field(default_factory=FlagsConfig)
    train: dict = field(default_factory=dict)
    unknown_keys: list[str] = field(default_factory=list, repr=False)

    @property
    def d(self) -> int:
        return self.image_size * self.image_size

    @property
    def grid(self) -> list[int]:
        return list(self.k_grid) if self.k_grid is not None else default_k_grid(self.d)

    def train_config(self, seed: int) -> TrainConfig:
        params = {k: v for k, v in self.train.items() if k != "seed"}
        return TrainConfig(seed=seed, **params)

    def digest(self) -> str:
        """SHA-256 over everything that influences results (not paths of outputs or job count)."""
        payload = dataclasses.asdict(self)
        for key in ("output_dir", "jobs", "unknown_keys"):
            payload.pop(key)
        payload["k_grid"] = self.grid
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


def _fill(cls, raw: dict, prefix: str, unknown: list[str]):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown.extend(f"{prefix}{k}" for k in raw if k not in names)
    return cls(**{k: v for k, v in raw.items() if k in names})


def config_from_dict(raw: dict) -> ExperimentConfig:
    raw = dict(raw)
    unknown: list[str] = []
    nested = {}
    for key, cls in (("data", DataConfig), ("split", SplitConfig), ("flags", FlagsConfig)):
        nested[key] = _fill(cls, raw.pop(key, {}), f"{key}.", unknown)
    attacks = None
    if "attacks" in raw:
        attacks = []
        for i, a in enumerate(raw.pop("attacks")):
            a = dict(a)
            a.setdefault("name", f"attack{i + 1}")
            a.setdefault("kind", "")
            attacks.append(_fill(AttackConfig, a, f"attacks[{i}].", unknown))
    train = dict(raw.pop("train", {}))
    train_fields = {f.name for f in dataclasses.fields(TrainConfig)}
    unknown.extend(f"train.{k}" for k in train if k not in train_fields)
    train = {k: v for k, v in train.items() if k in train_fields}
    cfg = _fill(ExperimentConfig, raw, "", unknown)
    cfg.data, cfg.split, cfg.flags = nested["data"], nested["split"], nested["flags"]
    cfg.train = train
    if attacks is not None:
        cfg.attacks = attacks
    cfg.unknown_keys = unknown
    return cfg


def load_config(path, env: dict | None = None) -> ExperimentConfig:
    """Read a TOML config; relative data paths resolve against the file's directory."""
    path = Path(path)
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    cfg = config_from_dict(raw)
    base = path.parent
    for attr in ("path", "external_path"):
        value = getattr(cfg.data, attr)
        if value is not None and not os.path.isabs(value):
            setattr(cfg.data, attr, str(base / value))
    apply_env_overrides(cfg, os.environ if env is None else env)
    return cfg


def apply_env_overrides(cfg: ExperimentConfig, env) -> None:
    if env.get("RECONBENCH_OUT_DIR"):
        cfg.output_dir = env["RECONBENCH_OUT_DIR"]
    if env.get("RECONBENCH_JOBS"):
        cfg.jobs = int(env["RECONBENCH_JOBS"])


def validate_config(cfg: ExperimentConfig) -> list[str]:
    """Every problem found in ``cfg``; an empty list means the config is runnable."""
    findings = [f"unknown key {k!r}" for k in cfg.unknown_keys]
    if cfg.image_size < 1:
        findings.append(f"image_size must be positive, got {cfg.image_size}")
    d = cfg.d
    if not cfg.methods:
        findings.append("methods list is empty")
    valid_methods = {m.value for m in Method}
    for m in cfg.methods:
        if m not in valid_methods:
            findings.append(f"unknown method {m!r} (expected one of {sorted(valid_methods)})")
    if len(set(cfg.methods)) != len(cfg.methods):
        findings.append("methods list has duplicates")
    grid = cfg.grid
    if not grid:
        findings.append("K grid is empty")
    for k in grid:
        if not isinstance(k, int) or k < 1:
            findings.append(f"K={k} must be a positive integer")
        elif k > d:
            findings.append(f"K={k} exceeds D={d}")
    if len(set(grid)) != len(grid):
        findings.append("K grid has duplicates")

    valid_clf = {c.value for c in ClassifierKind}
    for c in cfg.classifiers:
        if c not in valid_clf:
            findings.append(f"unknown classifier {c!r} (expected one of {sorted(valid_clf)})")
    try:
        cfg.train_config(0)
    except (TypeError, ValueError) as exc:
        findings.append(f"invalid training parameters: {exc}")

    if not cfg.attacks:
        findings.append("attacks list is empty")
    names = [a.name for a in cfg.attacks]
    if len(set(names)) != len(names):
        findings.append("attack names are not unique")
    for a in cfg.attacks:
        if "," in a.name:
            findings.append(f"attack name {a.name!r} must not contain commas")
        if a.kind not in {k.value for k in AttackKind}:
            findings.append(f"attack {a.name!r}: unknown kind {a.kind!r}")
        elif a.kind == AttackKind.REGRESSION.value:
            if a.dataset not in ATTACKER_BINDINGS:
                findings.append(
                    f"attack {a.name!r}: regression needs dataset in {sorted(ATTACKER_BINDINGS)}, got {a.dataset!r}"
                )
        elif a.dataset is not None:
            findings.append(f"attack {a.name!r}: pinv attack takes no dataset")

    data = cfg.data
    if data.source not in ("synth", "images"):
        findings.append(f"data.source must be 'synth' or 'images', got {data.source!r}")
    if data.source == "images":
        if not data.path:
            findings.append("data.path is required when data.source = 'images'")
        elif not Path(data.path).exists():
            findings.append(f"dataset path {data.path} does not exist")
        if any(a.dataset == "external" for a in cfg.attacks):
            if not data.external_path:
                findings.append("an attack uses the external dataset but data.external_path is not set")
            elif not Path(data.external_path).exists():
                findings.append(f"external dataset path {data.external_path} does not exist")
    if data.source == "synth":
        if data.synth_classes < 2 or data.synth_per_class < 2 or data.external_count < 1:
            findings.append("synthetic data needs >= 2 classes, >= 2 images per class and external_count >= 1")
        if data.synth_snr <= 0:
            findings.append("data.synth_snr must be positive")

    if not 0.0 < cfg.split.train_fraction < 1.0:
        findings.append(f"split.train_fraction must lie in (0, 1), got {cfg.split.train_fraction}")
    if cfg.split.classes_per_side is not None and cfg.split.classes_per_side < 1:
        findings.append("split.classes_per_side must be positive")
    if cfg.flags.rp_variance_mode not in {v.value for v in VarianceMode}:
        findings.append(f"unknown rp_variance_mode {cfg.flags.rp_variance_mode!r}")
    if cfg.flags.attacker_row_cap < 1:
        findings.append("flags.attacker_row_cap must be positive")
    if cfg.gallery_count < 0:
        findings.append("gallery_count must be non-negative")
    if cfg.jobs < 1:
        findings.append("jobs must be positive")
    return findings
