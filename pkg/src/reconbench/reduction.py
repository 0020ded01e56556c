"""Projection matrices for linear dimensionality reduction ``y = P x``.

Three builders: random pixel sampling (a 0/1 selection matrix), Gaussian
random projection and PCA fitted on a training set. Datasets are row-major
(N x D), so :func:`project_dataset` computes ``X @ P.T``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import InvalidSpecError, ShapeError
from .rng import Stream


class Method(str, enum.Enum):
    RANDOM_SAMPLING = "random_sampling"
    RANDOM_PROJECTION = "random_projection"
    PCA = "pca"


class VarianceMode(str, enum.Enum):
    # entries ~ N(0, 1/K)
    STANDARD = "standard"
    # entries ~ N(0, sqrt(1/K)), i.e. the variance itself is sqrt(1/K)
    PAPER_LITERAL = "paper_literal"


@dataclass(frozen=True)
class ProjectionSpec:
    method: Method
    d: int
    k: int
    seed: int = 0
    center: bool = False
    rp_variance_mode: VarianceMode = VarianceMode.STANDARD

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "rp_variance_mode", VarianceMode(self.rp_variance_mode))
        if not 1 <= self.k <= self.d:
            raise InvalidSpecError(f"need 1 <= k <= d, got k={self.k}, d={self.d}")


@dataclass(frozen=True, eq=False)
class ProjectionMatrix:
    """A realized K x D projection; ``mean`` is set only for centered PCA."""

    spec: ProjectionSpec
    p: np.ndarray
    mean: np.ndarray | None = None
    phi: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if self.p.shape != (self.spec.k, self.spec.d):
            raise ShapeError(
                f"projection matrix shape {self.p.shape} does not match "
                f"(k, d) = ({self.spec.k}, {self.spec.d})"
            )
        self.p.setflags(write=False)
        if self.mean is not None:
            self.mean.setflags(write=False)
        if self.phi is not None:
            self.phi.setflags(write=False)

    @property
    def d(self) -> int:
        return self.spec.d

    @property
    def k(self) -> int:
        return self.spec.k


def sampling_matrix(phi, d: int) -> np.ndarray:
    """Selection matrix with ``p[i, phi[i]] = 1`` and zeros elsewhere."""
    phi = np.asarray(phi, dtype=np.int64)
    if len(np.unique(phi)) != len(phi):
        raise InvalidSpecError("sampling indices must be pairwise distinct")
    if phi.size and (phi.min() < 0 or phi.max() >= d):
        raise InvalidSpecError(f"sampling indices must lie in [0, {d})")
    p = np.zeros((len(phi), d))
    p[np.arange(len(phi)), phi] = 1.0
    return p


def from_sampling_indices(phi, d: int, seed: int = 0) -> ProjectionMatrix:
    """Random-sampling projection for explicitly given indices ``phi``."""
    phi = np.asarray(phi, dtype=np.int64).copy()
    spec = ProjectionSpec(Method.RANDOM_SAMPLING, d=d, k=len(phi), seed=seed)
    return ProjectionMatrix(spec=spec, p=sampling_matrix(phi, d), phi=phi)


def build_random_sampling(d: int, k: int, seed: int) -> ProjectionMatrix:
    """Keep ``k`` pixels chosen by the first ``k`` steps of a seeded shuffle."""
    spec = ProjectionSpec(Method.RANDOM_SAMPLING, d=d, k=k, seed=seed)
    phi = Stream(seed).sample_indices(d, k)
    return ProjectionMatrix(spec=spec, p=sampling_matrix(phi, d), phi=phi)


def build_random_projection(
    d: int, k: int, seed: int, variance_mode: VarianceMode | str = VarianceMode.STANDARD
) -> ProjectionMatrix:
    """Dense Gaussian projection, entries i.i.d. with mean zero.

    The standard mode uses variance ``1/k``; ``paper_literal`` uses variance
    ``sqrt(1/k)``. Entries are drawn row-major from the seeded stream.
    """
    spec = ProjectionSpec(
        Method.RANDOM_PROJECTION, d=d, k=k, seed=seed, rp_variance_mode=variance_mode
    )
    var = 1.0 / k if spec.rp_variance_mode is VarianceMode.STANDARD else np.sqrt(1.0 / k)
    p = Stream(seed).normal(k * d).reshape(k, d) * np.sqrt(var)
    return ProjectionMatrix(spec=spec, p=p)


def fit_pca(train, k: int, center: bool = False, seed: int = 0) -> ProjectionMatrix:
    """Top-``k`` principal directions of ``train`` (N x D) as the rows of P.

    Components are always fitted on mean-centered data. With ``center=False``
    the projection stays strictly linear (``y = P x``); with ``center=True``
    the training mean is stored and subtracted before projecting.
    ``seed`` is recorded only.
    """
    x = linalg.as_matrix(train, "train")
    n, d = x.shape
    if n < 2:
        raise InvalidSpecError("PCA needs at least two training rows")
    if not 1 <= k <= min(n, d):
        raise InvalidSpecError(f"need 1 <= k <= min(N, D) = {min(n, d)}, got k={k}")
    mu = x.mean(axis=0)
    res = linalg.svd(x - mu)
    s = res.singular_values
    rank = int(np.sum(s > linalg.default_rank_tol(x.shape, s[0]))) if s[0] > 0 else 0
    if k > rank:
        raise InvalidSpecError(f"k={k} exceeds the numerical rank {rank} of the centered training data")
    spec = ProjectionSpec(Method.PCA, d=d, k=k, seed=seed, center=center)
    return ProjectionMatrix(spec=spec, p=res.vt[:k].copy(), mean=mu if center else None)


def build(spec: ProjectionSpec, train=None) -> ProjectionMatrix:
    """Realize any :class:`ProjectionSpec`; PCA requires ``train``."""
    if spec.method is Method.RANDOM_SAMPLING:
        return build_random_sampling(spec.d, spec.k, spec.seed)
    if spec.method is Method.RANDOM_PROJECTION:
        return build_random_projection(spec.d, spec.k, spec.seed, spec.rp_variance_mode)
    if train is None:
        raise InvalidSpecError("PCA needs training data")
    train = linalg.as_matrix(train, "train")
    if train.shape[1] != spec.d:
        raise ShapeError(f"training data has {train.shape[1]} columns, spec expects d={spec.d}")
    return fit_pca(train, spec.k, center=spec.center, seed=spec.seed)


def project(pm: ProjectionMatrix, x) -> np.ndarray:
    x = linalg.as_vector(x, "x")
    if x.shape[0] != pm.d:
        raise ShapeError(f"vector has dim {x.shape[0]}, projection expects {pm.d}")
    return project_dataset(pm, x[None, :])[0]


def project_dataset(pm: ProjectionMatrix, xs) -> np.ndarray:
    """Project every row of ``xs`` (N x D) to K dimensions."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[1] != pm.d:
        raise ShapeError(f"dataset shape {xs.shape} incompatible with projection d={pm.d}")
    if pm.phi is not None:
        # selection by index equals the 0/1 matrix product exactly
        return xs[:, pm.phi].copy()
    if pm.mean is not None:
        xs = xs - pm.mean
    return xs @ pm.p.T
