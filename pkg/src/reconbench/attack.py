"""Reconstruction attacks ``x' = Q y`` against a known projection matrix.

Two ways to obtain Q: the pseudo-inverse of P, and a least-squares regression
from an attacker-held image set projected through P.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import NumericalError, ShapeError
from .reduction import ProjectionMatrix, project_dataset
from .rng import Stream

DEFAULT_ROW_CAP = 20_000


class AttackKind(str, enum.Enum):
    PINV = "pinv"
    REGRESSION = "regression"


class AttackerType(str, enum.Enum):
    # same classes and distribution as the targets
    TYPE1 = "type1"
    # different classes and distribution
    TYPE2 = "type2"


@dataclass(frozen=True, eq=False)
class ReconstructionMatrix:
    """Attacker's D x K matrix, plus the public PCA mean and an optional bias."""

    q: np.ndarray
    kind: AttackKind
    attacker_dataset_id: str | None = None
    mean: np.ndarray | None = None
    bias: np.ndarray | None = None
    rows_used: int | None = None

    def __post_init__(self):
        self.q.setflags(write=False)

    @property
    def d(self) -> int:
        return self.q.shape[0]

    @property
    def k(self) -> int:
        return self.q.shape[1]


@dataclass(frozen=True, eq=False)
class AttackSpec:
    kind: AttackKind
    attacker_dataset: np.ndarray | None = None
    attacker_type: AttackerType | None = None
    dataset_id: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", AttackKind(self.kind))
        if self.kind is AttackKind.REGRESSION and (
            self.attacker_dataset is None or len(self.attacker_dataset) == 0
        ):
            raise ValueError("a regression attack needs a non-empty attacker dataset")


def attack_pinv(pm: ProjectionMatrix) -> ReconstructionMatrix:
    q = linalg.pseudo_inverse(pm.p)
    return ReconstructionMatrix(q=q, kind=AttackKind.PINV, mean=pm.mean)


def attack_regression(
    pm: ProjectionMatrix,
    x_attack,
    dataset_id: str | None = None,
    intercept: bool = False,
    row_cap: int | None = DEFAULT_ROW_CAP,
    seed: int = 0,
) -> ReconstructionMatrix:
    """Fit Q by least squares so that ``Q @ Y_attack.T`` approximates ``X_attack.T``.

    ``Y_attack`` is ``X_attack`` projected through ``pm``. The minimum-norm
    solution is returned. When the projection is centered, the regression
    target is ``X_attack - mean`` so that :func:`reconstruct` can add the
    mean back uniformly. If ``X_attack`` has more than ``row_cap`` rows, a
    seeded subset of ``row_cap`` rows is used.
    """
    x_attack = linalg.as_matrix(x_attack, "x_attack")
    if x_attack.shape[1] != pm.d:
        raise ShapeError(
            f"attacker data has {x_attack.shape[1]} columns, projection expects d={pm.d}"
        )
    if row_cap is not None and x_attack.shape[0] > row_cap:
        idx = np.sort(Stream(seed).sample_indices(x_attack.shape[0], row_cap))
        x_attack = x_attack[idx]
    y_attack = project_dataset(pm, x_attack)
    if not np.any(y_attack):
        raise NumericalError(
            f"projected attacker data of shape {y_attack.shape} is identically zero"
        )
    target = x_attack if pm.mean is None else x_attack - pm.mean
    design = np.hstack([y_attack, np.ones((len(y_attack), 1))]) if intercept else y_attack
    # design @ Q^T ~ target
    qt = linalg.solve_least_squares(design, target)
    bias = None
    if intercept:
        bias, qt = qt[-1].copy(), qt[:-1]
    return ReconstructionMatrix(
        q=np.ascontiguousarray(qt.T),
        kind=AttackKind.REGRESSION,
        attacker_dataset_id=dataset_id,
        mean=pm.mean,
        bias=bias,
        rows_used=x_attack.shape[0],
    )


def reconstruct(rm: ReconstructionMatrix, ys) -> np.ndarray:
    """Map reduced rows (N x K) back to image space (N x D)."""
    ys = np.asarray(ys, dtype=np.float64)
    if ys.ndim != 2 or ys.shape[1] != rm.k:
        raise ShapeError(f"reduced data shape {ys.shape} incompatible with Q of shape {rm.q.shape}")
    out = ys @ rm.q.T
    if rm.bias is not None:
        out += rm.bias
    if rm.mean is not None:
        out += rm.mean
    return out
