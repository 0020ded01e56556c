import numpy as np
import pytest
from hypothesis import given, strategies as st

from reconbench import linalg, reduction
from reconbench.errors import InvalidSpecError, ShapeError
from reconbench.reduction import Method, ProjectionSpec, VarianceMode


def test_sampling_matrix_from_fixed_phi():
    pm = reduction.from_sampling_indices([2, 0], 4)
    assert np.array_equal(pm.p, [[0, 0, 1, 0], [1, 0, 0, 0]])


def test_project_sampling_picks_entries():
    pm = reduction.from_sampling_indices([2, 0], 4)
    assert np.array_equal(reduction.project(pm, [10, 20, 30, 40]), [30, 10])


def test_full_sampling_is_a_permutation(rng):
    pm = reduction.build_random_sampling(10, 10, seed=3)
    assert np.array_equal(pm.p @ pm.p.T, np.eye(10))
    x = rng.standard_normal(10)
    assert sorted(reduction.project(pm, x)) == sorted(x)


def test_28x28_dimension():
    pm = reduction.build_random_sampling(28 * 28, 100, seed=0)
    assert pm.p.shape == (100, 784)


def test_sampling_rejects_k_above_d():
    with pytest.raises(InvalidSpecError):
        reduction.build_random_sampling(4, 5, 0)


@given(st.integers(1, 64), st.data())
def test_sampling_matrix_structure(d, data):
    k = data.draw(st.integers(1, d))
    seed = data.draw(st.integers(0, 2**64 - 1))
    pm = reduction.build_random_sampling(d, k, seed)
    p = pm.p
    assert set(np.unique(p)) <= {0.0, 1.0}
    assert np.array_equal(p.sum(axis=1), np.ones(k))
    assert set(np.unique(p.sum(axis=0))) <= {0.0, 1.0}
    assert np.array_equal(np.argmax(p, axis=1), pm.phi)


@given(st.integers(1, 40), st.data())
def test_sampling_projection_is_subsequence(d, data):
    k = data.draw(st.integers(1, d))
    pm = reduction.build_random_sampling(d, k, data.draw(st.integers(0, 1000)))
    x = np.arange(d, dtype=float) * 1.5 - 7
    y = reduction.project(pm, x)
    assert np.array_equal(y, x[pm.phi])
    assert np.array_equal(y, pm.p @ x)


def test_random_projection_statistics():
    k, d = 100, 784
    p = reduction.build_random_projection(d, k, seed=11).p
    sigma = np.sqrt(1.0 / k)
    assert abs(p.mean()) < 4 * sigma / np.sqrt(k * d)
    assert abs(p.var() - 1.0 / k) < 0.05 / k


def test_random_projection_literal_variance_mode():
    k, d = 100, 784
    p = reduction.build_random_projection(d, k, seed=11, variance_mode="paper_literal").p
    assert abs(p.var() - np.sqrt(1.0 / k)) < 0.05 * np.sqrt(1.0 / k)


def test_random_projection_seed_determinism():
    a = reduction.build_random_projection(50, 10, seed=5).p
    b = reduction.build_random_projection(50, 10, seed=5).p
    c = reduction.build_random_projection(50, 10, seed=6).p
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, c)


def naive_matvec(p, x):
    return np.array([sum(p[i, j] * x[j] for j in range(len(x))) for i in range(len(p))])


def test_random_projection_matches_naive_oracle(rng):
    pm = reduction.build_random_projection(20, 7, seed=2)
    x = rng.standard_normal(20)
    assert np.allclose(reduction.project(pm, x), naive_matvec(pm.p, x), atol=1e-12)


def test_pca_on_line_through_origin():
    direction = np.array([3.0, -4.0, 12.0]) / 13.0
    t = np.linspace(-2, 2, 9)
    x = t[:, None] * direction
    pm = reduction.fit_pca(x, 1)
    assert np.allclose(np.abs(pm.p[0]), np.abs(direction))
    recon = reduction.project_dataset(pm, x) @ linalg.pseudo_inverse(pm.p).T
    assert np.mean((recon - x) ** 2) < 1e-10


def test_pca_full_rank_retention(rng):
    x = rng.standard_normal((10, 4)) @ rng.standard_normal((4, 6))
    x -= x.mean(axis=0)  # zero-mean data: centered rank equals rank
    pm = reduction.fit_pca(x, 4)
    recon = reduction.project_dataset(pm, x) @ linalg.pseudo_inverse(pm.p).T
    assert np.allclose(recon, x, atol=1e-8)


def test_pca_residual_matches_trailing_singular_values(rng):
    x = rng.standard_normal((5, 3))
    xc = x - x.mean(axis=0)
    pm = reduction.fit_pca(xc, 2)
    recon = reduction.project_dataset(pm, xc) @ linalg.pseudo_inverse(pm.p).T
    # oracle: eigenvalues of the scatter matrix are the squared singular values
    eig = np.sort(np.linalg.eigvalsh(xc.T @ xc))[::-1]
    assert abs(np.mean((recon - xc) ** 2) - eig[2:].sum() / xc.size) < 1e-8


def test_pca_rows_orthonormal_and_nested(rng):
    x = rng.standard_normal((40, 12))
    p5 = reduction.fit_pca(x, 5).p
    p6 = reduction.fit_pca(x, 6).p
    assert np.allclose(p5 @ p5.T, np.eye(5), atol=1e-8)
    assert np.array_equal(p6[:5], p5)


def test_pca_rank_error():
    x = np.outer(np.arange(6.0), [1.0, 2.0, 3.0])
    with pytest.raises(InvalidSpecError, match="rank 1"):
        reduction.fit_pca(x, 2)
    with pytest.raises(InvalidSpecError):
        reduction.fit_pca(x[:1], 1)


def test_pca_centering_stores_and_uses_mean(rng):
    x = rng.standard_normal((30, 5)) + 10.0
    plain = reduction.fit_pca(x, 2)
    centered = reduction.fit_pca(x, 2, center=True)
    assert plain.mean is None
    assert np.allclose(centered.mean, x.mean(axis=0))
    assert np.array_equal(plain.p, centered.p)
    assert np.allclose(reduction.project_dataset(centered, x), (x - x.mean(axis=0)) @ plain.p.T)


def test_pca_identity_basis_projection_is_identity_up_to_sign(rng):
    x = rng.standard_normal((50, 4))
    x -= x.mean(axis=0)
    pm = reduction.fit_pca(x, 4)
    v = rng.standard_normal(4)
    y = reduction.project(pm, v)
    assert np.allclose(pm.p.T @ y, v)


def test_project_dataset_rowwise(rng):
    xs = rng.standard_normal((10, 8))
    for pm in (
        reduction.build_random_projection(8, 3, seed=1),
        reduction.build_random_sampling(8, 3, seed=1),
        reduction.fit_pca(xs, 3),
    ):
        out = reduction.project_dataset(pm, xs)
        for i in range(len(xs)):
            assert np.allclose(out[i], reduction.project(pm, xs[i]), atol=1e-12)
    one = xs[:1]
    pm = reduction.build_random_projection(8, 3, seed=1)
    assert np.array_equal(reduction.project_dataset(pm, one)[0], reduction.project(pm, one[0]))


def test_project_dataset_identity_sampling(rng):
    pm = reduction.from_sampling_indices(np.arange(6), 6)
    xs = rng.standard_normal((4, 6))
    assert np.array_equal(reduction.project_dataset(pm, xs), xs)


def test_sampling_index_projection_equals_matrix_product(rng):
    pm = reduction.build_random_sampling(30, 12, seed=4)
    xs = rng.standard_normal((7, 30))
    assert np.array_equal(reduction.project_dataset(pm, xs), xs @ pm.p.T)


def test_project_shape_errors():
    pm = reduction.build_random_sampling(5, 2, 0)
    with pytest.raises(ShapeError):
        reduction.project(pm, np.ones(4))
    with pytest.raises(ShapeError):
        reduction.project_dataset(pm, np.ones((2, 6)))


def test_build_dispatch_and_spec_validation(rng):
    x = rng.standard_normal((20, 6))
    for method in Method:
        spec = ProjectionSpec(method, d=6, k=3, seed=9)
        a = reduction.build(spec, x)
        b = reduction.build(spec, x)
        assert a.p.tobytes() == b.p.tobytes()
        assert a.spec == spec
    with pytest.raises(InvalidSpecError):
        ProjectionSpec(Method.PCA, d=3, k=4)
    with pytest.raises(InvalidSpecError):
        reduction.build(ProjectionSpec(Method.PCA, d=6, k=2))
    assert ProjectionSpec("random_projection", 4, 2, rp_variance_mode="paper_literal").rp_variance_mode is VarianceMode.PAPER_LITERAL


def test_projection_matrix_is_read_only():
    pm = reduction.build_random_projection(5, 2, seed=0)
    with pytest.raises(ValueError):
        pm.p[0, 0] = 1.0
