"""Batch runner: reductions x K grid x attacks x classifiers.

Each (method, K) cell builds one projection matrix, trains the utility
classifiers on reduced data and runs every configured attack against the
reference logistic-regression classifier trained once on original pixels.
Failures inside a cell become ``error`` rows; other cells are unaffected.
"""
from __future__ import annotations

import csv
import io
import logging
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, classify, container, data
from .attack import AttackKind, attack_pinv, attack_regression
from .classify import ClassifierKind
from .config import ExperimentConfig, validate_config
from .metrics import evaluate_attack
from .reduction import Method, ProjectionSpec, build, project_dataset
from .rng import STREAM_VERSION, derive_seed

log = logging.getLogger(__name__)

CSV_HEADER = ["method", "k", "seed", "attack", "mse", "arr", "classifier", "accuracy", "status"]
THETA = ClassifierKind.LOGISTIC_REGRESSION.value


class ConfigError(ValueError):
    def __init__(self, findings):
        super().__init__("invalid config:\n  " + "\n  ".join(findings))
        self.findings = findings


@dataclass
class Row:
    method: str
    k: int
    seed: int
    attack: str = ""
    mse: float | None = None
    arr: float | None = None
    classifier: str = ""
    accuracy: float | None = None
    status: str = "ok"

    def as_csv(self) -> list[str]:
        return [
            self.method,
            str(self.k),
            str(self.seed),
            self.attack,
            _fmt(self.mse),
            _fmt(self.arr),
            self.classifier,
            _fmt(self.accuracy),
            self.status,
        ]


def _fmt(v: float | None) -> str:
    return "" if v is None else f"{v:.9g}"


def write_csv(path, rows: list[Row]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(r.as_csv() for r in rows)
    Path(path).write_bytes(buf.getvalue().encode("utf-8"))


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


@dataclass
class Datasets:
    train: data.LabeledDataset
    test: data.LabeledDataset
    sub: data.LabeledDataset
    external: data.LabeledDataset | None

    def attacker(self, binding: str) -> data.LabeledDataset:
        ds = getattr(self, binding)
        if ds is None:
            raise data.DataError(f"no {binding!r} dataset is loaded")
        return ds


def prepare_datasets(cfg: ExperimentConfig) -> Datasets:
    split = data.SplitSpec(
        class_partition_seed=cfg.split.class_partition_seed,
        per_class_train_fraction=cfg.split.train_fraction,
        classes_per_side=cfg.split.classes_per_side,
        train_test_seed=cfg.split.train_test_seed,
    )
    needs_external = any(a.dataset == "external" for a in cfg.attacks)
    external = None
    if cfg.data.source == "synth":
        full = data.synth_faces(
            cfg.data.synth_classes,
            cfg.data.synth_per_class,
            cfg.d,
            seed=derive_seed(cfg.seed, "synth-faces"),
            snr=cfg.data.synth_snr,
        )
        if needs_external:
            external = data.synth_textures(
                cfg.data.external_count, cfg.d, seed=derive_seed(cfg.seed, "synth-textures")
            )
    else:
        full = data.load_dataset_source(cfg.data.path, cfg.image_size, cfg.data.format)
        if needs_external:
            external = data.load_dataset_source(
                cfg.data.external_path, cfg.image_size, cfg.data.external_format
            )
    if full.d != cfg.d:
        raise data.DataError(f"dataset has D={full.d}, config expects {cfg.d}")
    train, test, sub = data.split_protocol(full, split)
    return Datasets(train=train, test=test, sub=sub, external=external)


@dataclass
class Context:
    cfg: ExperimentConfig
    datasets: Datasets
    theta: classify.Classifier
    acc_original: float
    digest: str


def build_context(cfg: ExperimentConfig) -> Context:
    findings = validate_config(cfg)
    if findings:
        raise ConfigError(findings)
    ds = prepare_datasets(cfg)
    theta = classify.train(
        THETA, ds.train.xs, ds.train.labels, cfg.train_config(derive_seed(cfg.seed, "theta")),
        num_classes=ds.train.class_count,
    )
    acc = classify.accuracy(theta, ds.test.xs, ds.test.labels)
    return Context(cfg=cfg, datasets=ds, theta=theta, acc_original=acc, digest=cfg.digest())


def cell_seed(cfg: ExperimentConfig, method: str, k: int) -> int:
    return derive_seed(cfg.seed, method, k)


def build_projection(ctx: Context, method: str, k: int):
    cfg = ctx.cfg
    spec = ProjectionSpec(
        method=Method(method),
        d=cfg.d,
        k=k,
        seed=cell_seed(cfg, method, k),
        center=cfg.flags.center,
        rp_variance_mode=cfg.flags.rp_variance_mode,
    )
    return build(spec, ctx.datasets.train.xs)


def build_attack(ctx: Context, pm, attack_cfg):
    if attack_cfg.kind == AttackKind.PINV.value:
        return attack_pinv(pm)
    ds = ctx.datasets.attacker(attack_cfg.dataset)
    return attack_regression(
        pm,
        ds.xs,
        dataset_id=ds.name,
        intercept=ctx.cfg.flags.regression_intercept,
        row_cap=ctx.cfg.flags.attacker_row_cap,
        seed=derive_seed(ctx.cfg.seed, pm.spec.method.value, pm.k, attack_cfg.name),
    )


def _error_status(exc: BaseException) -> str:
    msg = " ".join(str(exc).split()) or type(exc).__name__
    return f"error: {type(exc).__name__}: {msg}"


@dataclass
class CellResult:
    method: str
    k: int
    seed: int
    accuracy_rows: list[Row] = field(default_factory=list)
    robustness_rows: list[Row] = field(default_factory=list)
    matrices: dict[str, bytes] = field(default_factory=dict)
    galleries: dict[str, tuple] = field(default_factory=dict)


def run_cell(ctx: Context, method: str, k: int) -> CellResult:
    cfg = ctx.cfg
    seed = cell_seed(cfg, method, k)
    res = CellResult(method, k, seed)
    ds = ctx.datasets
    try:
        pm = build_projection(ctx, method, k)
        y_train = project_dataset(pm, ds.train.xs)
        y_test = project_dataset(pm, ds.test.xs)
    except Exception as exc:  # fail-soft: every expected row becomes an error row
        log.warning("cell %s k=%d failed: %s", method, k, exc)
        status = _error_status(exc)
        res.accuracy_rows = [Row(method, k, seed, classifier=c, status=status) for c in cfg.classifiers]
        res.robustness_rows = [
            Row(method, k, seed, attack=a.name, classifier=THETA, status=status) for a in cfg.attacks
        ]
        return res
    if cfg.save_matrices:
        res.matrices[f"P_{method}_k{k}.rbmx"] = container.projection_to_bytes(pm)

    for clf in cfg.classifiers:
        try:
            model = classify.train(
                clf, y_train, ds.train.labels, cfg.train_config(derive_seed(cfg.seed, method, k, clf)),
                num_classes=ds.train.class_count,
            )
            acc = classify.accuracy(model, y_test, ds.test.labels)
            res.accuracy_rows.append(Row(method, k, seed, classifier=clf, accuracy=acc))
        except Exception as exc:
            res.accuracy_rows.append(Row(method, k, seed, classifier=clf, status=_error_status(exc)))

    for a in cfg.attacks:
        try:
            rm = build_attack(ctx, pm, a)
            report, recon = evaluate_attack(
                ds.test.xs, ds.test.labels, pm, rm, ctx.theta,
                attack_name=a.name,
                clip_reconstruction=cfg.flags.clip_reconstruction,
                acc_original=ctx.acc_original,
                config_digest=ctx.digest,
            )
            status = "ok" if report.arr is not None else "ok: arr undefined (original accuracy is zero)"
            res.robustness_rows.append(
                Row(method, k, seed, attack=a.name, mse=report.mse, arr=report.arr,
                    classifier=THETA, accuracy=report.acc_reconstructed, status=status)
            )
            if cfg.save_matrices:
                res.matrices[f"Q_{method}_k{k}_{a.name}.rbmx"] = container.reconstruction_to_bytes(rm)
            if cfg.gallery_count > 0:
                n = min(cfg.gallery_count, len(ds.test))
                res.galleries[a.name] = (ds.test.xs[:n], recon[:n], report)
        except Exception as exc:
            res.robustness_rows.append(
                Row(method, k, seed, attack=a.name, classifier=THETA, status=_error_status(exc))
            )
    return res


def write_gallery(out_dir, cell: tuple[str, int, str], originals, recons, report, size: int) -> Path:
    """Write ``NNN_original.pgm`` / ``NNN_reconstruction.pgm`` pairs plus ``cell.txt``."""
    method, k, attack = cell
    gdir = Path(out_dir) / "gallery" / f"{method}_k{k}_{attack}"
    gdir.mkdir(parents=True, exist_ok=True)
    for i, (x, xr) in enumerate(zip(originals, recons)):
        data.write_pgm(gdir / f"{i:03d}_original.pgm", data.vector_to_image(x, size))
        data.write_pgm(gdir / f"{i:03d}_reconstruction.pgm", data.vector_to_image(xr, size))
    lines = [
        f"method = {method}",
        f"k = {k}",
        f"attack = {attack}",
        f"images = {len(originals)}",
        f"mse = {report.mse:.9g}",
        f"arr = {'' if report.arr is None else format(report.arr, '.9g')}",
        f"acc_original = {report.acc_original:.9g}",
        f"acc_reconstructed = {report.acc_reconstructed:.9g}",
    ]
    (gdir / "cell.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return gdir


@dataclass
class RunManifest:
    config_digest: str
    master_seed: int
    cell_seeds: dict[str, int]
    versions: dict[str, str]
    decisions: dict[str, object]
    acc_original: float
    row_counts: dict[str, int]
    error_rows: int
    timestamps: dict[str, str] = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return 2 if self.error_rows else 0

    def to_text(self) -> str:
        lines = ["# reconbench run manifest", "[run]"]
        lines += [
            f"config_digest = {self.config_digest}",
            f"master_seed = {self.master_seed}",
            f"theta = {THETA}",
            f"theta_accuracy_original = {self.acc_original:.9g}",
            f"error_rows = {self.error_rows}",
        ]
        lines += [f"rows.{k} = {v}" for k, v in sorted(self.row_counts.items())]
        lines.append("[versions]")
        lines += [f"{k} = {v}" for k, v in sorted(self.versions.items())]
        lines.append("[decisions]")
        lines += [f"{k} = {v}" for k, v in sorted(self.decisions.items())]
        lines.append("[cell_seeds]")
        lines += [f"{k} = {v}" for k, v in self.cell_seeds.items()]
        lines.append("[timestamps]")
        lines += [f"{k} = {v}" for k, v in self.timestamps.items()]
        return "\n".join(lines) + "\n"


def _decisions(cfg: ExperimentConfig, ctx: Context) -> dict[str, object]:
    ds = ctx.datasets
    return {
        "center": cfg.flags.center,
        "clip_reconstruction": cfg.flags.clip_reconstruction,
        "rp_variance_mode": cfg.flags.rp_variance_mode,
        "regression_intercept": cfg.flags.regression_intercept,
        "attacker_row_cap": cfg.flags.attacker_row_cap,
        "pixel_range": "[0,1]",
        "resize": "bilinear (half-pixel centers, no antialiasing)",
        "luma_weights": ",".join(str(w) for w in data.LUMA_WEIGHTS),
        "arr_sign": "negative values reported, not clamped",
        "train_params": ",".join(f"{k}={v}" for k, v in sorted(vars(cfg.train_config(0)).items()) if k != "seed"),
        "data_source": cfg.data.source,
        "datasets": f"train={ds.train.name}:{len(ds.train)} test={ds.test.name}:{len(ds.test)} "
        f"sub={ds.sub.name}:{len(ds.sub)} external="
        + (f"{ds.external.name}:{len(ds.external)}" if ds.external is not None else "none"),
        "attacks": ";".join(
            f"{a.name}:{a.kind}" + (f"@{a.dataset}" if a.dataset else "")
            + (f"({a.attacker_type.value})" if a.attacker_type else "")
            for a in cfg.attacks
        ),
    }


_WORKER_CTX: Context | None = None


def _init_worker(ctx: Context) -> None:
    global _WORKER_CTX
    _WORKER_CTX = ctx


def _run_cell_in_worker(cell):
    return run_cell(_WORKER_CTX, *cell)


def run_experiment(cfg: ExperimentConfig, out_dir=None, jobs: int | None = None) -> RunManifest:
    """Run every cell and write ``accuracy.csv``, ``robustness.csv`` and ``manifest.txt``."""
    started = datetime.now(timezone.utc).isoformat(timespec="seconds")
    out = Path(out_dir or cfg.output_dir)
    jobs = jobs or cfg.jobs
    ctx = build_context(cfg)
    out.mkdir(parents=True, exist_ok=True)
    cells = [(m, k) for m in cfg.methods for k in cfg.grid]
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(ctx,)) as pool:
            results = list(pool.map(_run_cell_in_worker, cells))
    else:
        results = [run_cell(ctx, m, k) for m, k in cells]

    acc_rows = [r for res in results for r in res.accuracy_rows]
    rob_rows = [r for res in results for r in res.robustness_rows]
    write_csv(out / "accuracy.csv", acc_rows)
    write_csv(out / "robustness.csv", rob_rows)
    if cfg.save_matrices:
        mdir = out / "matrices"
        mdir.mkdir(exist_ok=True)
        for res in results:
            for name, blob in res.matrices.items():
                (mdir / name).write_bytes(blob)
    for res in results:
        for attack, (orig, recon, report) in res.galleries.items():
            write_gallery(out, (res.method, res.k, attack), orig, recon, report, cfg.image_size)

    errors = sum(1 for r in acc_rows + rob_rows if r.status.startswith("error"))
    manifest = RunManifest(
        config_digest=ctx.digest,
        master_seed=cfg.seed,
        cell_seeds={f"{res.method},{res.k}": res.seed for res in results},
        versions={
            "reconbench": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
            "rng": STREAM_VERSION,
        },
        decisions=_decisions(cfg, ctx),
        acc_original=ctx.acc_original,
        row_counts={"accuracy": len(acc_rows), "robustness": len(rob_rows)},
        error_rows=errors,
    )
    manifest.timestamps = {
        "started": started,
        "finished": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    (out / "manifest.txt").write_text(manifest.to_text(), encoding="utf-8")
    return manifest


def available_cells(cfg: ExperimentConfig) -> list[str]:
    return [f"{m},{k},{a.name}" for m in cfg.methods for k in cfg.grid for a in cfg.attacks]


def parse_cell(text: str) -> tuple[str, int, str]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"cell must look like 'method,k,attack', got {text!r}")
    try:
        k = int(parts[1])
    except ValueError as exc:
        raise ValueError(f"cell K must be an integer, got {parts[1]!r}") from exc
    return parts[0], k, parts[2]


def emit_reconstruction_gallery(cfg: ExperimentConfig, cell, count: int, out_dir=None, ctx: Context | None = None) -> Path:
    """Recompute one (method, K, attack) cell and write ``count`` image pairs."""
    method, k, attack = parse_cell(cell) if isinstance(cell, str) else cell
    if f"{method},{k},{attack}" not in available_cells(cfg):
        raise KeyError(
            f"unknown cell {method},{k},{attack}; available cells: " + " ".join(available_cells(cfg))
        )
    if count < 0:
        raise ValueError("count must be non-negative")
    ctx = ctx or build_context(cfg)
    attack_cfg = next(a for a in cfg.attacks if a.name == attack)
    pm = build_projection(ctx, method, k)
    rm = build_attack(ctx, pm, attack_cfg)
    ds = ctx.datasets
    report, recon = evaluate_attack(
        ds.test.xs, ds.test.labels, pm, rm, ctx.theta,
        attack_name=attack,
        clip_reconstruction=cfg.flags.clip_reconstruction,
        acc_original=ctx.acc_original,
    )
    n = min(count, len(ds.test))
    return write_gallery(out_dir or cfg.output_dir, (method, k, attack), ds.test.xs[:n], recon[:n], report, cfg.image_size)
