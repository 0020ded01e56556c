"""Robustness metrics: reconstruction MSE and accuracy reduction ratio (ARR)."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import classify
from .attack import ReconstructionMatrix, reconstruct
from .errors import ShapeError, UndefinedMetricError
from .reduction import ProjectionMatrix, project_dataset


@dataclass
class RobustnessReport:
    method: str
    k: int
    attack: str
    mse: float
    arr: float | None
    acc_original: float
    acc_reconstructed: float
    seed: int | None = None
    config_digest: str = ""
    notes: list[str] = field(default_factory=list)


def mse(x, x_prime) -> float:
    """Mean of squared elementwise differences (numpy pairwise summation)."""
    x = np.asarray(x, dtype=np.float64)
    x_prime = np.asarray(x_prime, dtype=np.float64)
    if x.shape != x_prime.shape:
        raise ShapeError(f"shape mismatch: {x.shape} vs {x_prime.shape}")
    if x.size == 0:
        raise ShapeError("mse needs at least one entry")
    diff = (x - x_prime).ravel()
    return float(np.sum(diff * diff) / diff.size)


def arr(acc_original: float, acc_reconstructed: float) -> float:
    """Relative accuracy drop ``(acc_original - acc_reconstructed) / acc_original``.

    Negative values (reconstructions classified better than originals) are
    returned unchanged.
    """
    for name, v in (("acc_original", acc_original), ("acc_reconstructed", acc_reconstructed)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {v}")
    if acc_original == 0:
        raise UndefinedMetricError("ARR is undefined when the original accuracy is zero")
    return (acc_original - acc_reconstructed) / acc_original


def evaluate_attack(
    targets,
    labels,
    pm: ProjectionMatrix,
    rm: ReconstructionMatrix,
    theta: classify.Classifier,
    *,
    attack_name: str | None = None,
    clip_reconstruction: bool = False,
    acc_original: float | None = None,
    config_digest: str = "",
) -> tuple[RobustnessReport, np.ndarray]:
    """Project ``targets``, reconstruct them with ``rm`` and score the result.

    ``theta`` must be trained on original-space (D-dimensional) features.
    Returns the report and the reconstructions. ``acc_original`` may be
    passed in to skip re-scoring the originals.
    """
    targets = np.asarray(targets, dtype=np.float64)
    labels = np.asarray(labels)
    if targets.ndim != 2 or len(labels) != len(targets):
        raise ShapeError(f"targets {targets.shape} and labels {labels.shape} do not line up")
    if theta.input_dim != targets.shape[1]:
        raise ShapeError(
            f"reference classifier expects {theta.input_dim} features, targets have {targets.shape[1]}"
        )
    recon = reconstruct(rm, project_dataset(pm, targets))
    if clip_reconstruction:
        recon = np.clip(recon, 0.0, 1.0)
    if acc_original is None:
        acc_original = classify.accuracy(theta, targets, labels)
    acc_recon = classify.accuracy(theta, recon, labels)
    notes = []
    try:
        ratio = arr(acc_original, acc_recon)
    except UndefinedMetricError as exc:
        ratio = None
        notes.append(str(exc))
    report = RobustnessReport(
        method=pm.spec.method.value,
        k=pm.k,
        attack=attack_name or rm.kind.value,
        mse=mse(targets, recon),
        arr=ratio,
        acc_original=acc_original,
        acc_reconstructed=acc_recon,
        seed=pm.spec.seed,
        config_digest=config_digest,
        notes=notes,
    )
    return report, recon
