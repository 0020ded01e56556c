import numpy as np
import pytest

from reconbench import attack, linalg, reduction
from reconbench.attack import AttackKind, AttackSpec
from reconbench.errors import NumericalError, ShapeError


def test_pinv_attack_on_sampling_zero_fills():
    pm = reduction.from_sampling_indices([2, 0], 4)
    rm = attack.attack_pinv(pm)
    y = reduction.project(pm, [10, 20, 30, 40])
    out = attack.reconstruct(rm, y[None, :])[0]
    assert np.allclose(out, [10, 0, 30, 0], atol=1e-12)


def test_pinv_sampling_mse_closed_form():
    pm = reduction.from_sampling_indices([2, 0], 4)
    x = np.array([[10.0, 20.0, 30.0, 40.0]])
    out = attack.reconstruct(attack.attack_pinv(pm), reduction.project_dataset(pm, x))
    assert abs(np.mean((out - x) ** 2) - (20**2 + 40**2) / 4) < 1e-12


def test_pinv_attack_inverts_a_permutation(rng):
    pm = reduction.build_random_sampling(9, 9, seed=1)
    xs = rng.standard_normal((3, 9))
    out = attack.reconstruct(attack.attack_pinv(pm), reduction.project_dataset(pm, xs))
    assert np.allclose(out, xs, atol=1e-12)


def test_pinv_attack_on_pca_is_transpose(rng):
    xs = rng.standard_normal((30, 8))
    pm = reduction.fit_pca(xs, 3)
    assert np.allclose(attack.attack_pinv(pm).q, pm.p.T, atol=1e-10)


def test_pinv_attack_random_projection_is_projector(rng):
    pm = reduction.build_random_projection(12, 5, seed=3)
    q = attack.attack_pinv(pm).q
    proj = q @ pm.p
    assert np.allclose(proj @ proj, proj, atol=1e-10)
    assert np.allclose(proj, proj.T, atol=1e-10)


def test_regression_normal_equations_small_case():
    # M=2, D=2, K=1: closed form by the normal equations
    pm = reduction.from_sampling_indices([0], 2)
    xa = np.array([[1.0, 2.0], [3.0, 5.0]])
    rm = attack.attack_regression(pm, xa)
    y = xa[:, :1]
    oracle = (np.linalg.inv(y.T @ y) @ y.T @ xa).T
    assert np.allclose(rm.q, oracle, atol=1e-12)
    assert rm.q.shape == (2, 1)
    assert rm.rows_used == 2


def test_regression_beats_pinv_and_perturbations():
    rng = np.random.default_rng(3)
    for inst in range(5):
        xa = rng.uniform(0, 1, (60, 16))
        pm = reduction.build_random_projection(16, 6, seed=inst)
        ya = reduction.project_dataset(pm, xa)
        q_reg = attack.attack_regression(pm, xa).q
        q_pinv = attack.attack_pinv(pm).q

        def resid(q):
            return np.linalg.norm(xa - ya @ q.T)

        best = resid(q_reg)
        assert best <= resid(q_pinv) + 1e-9
        for _ in range(100):
            assert best <= resid(q_reg + 1e-3 * rng.standard_normal(q_reg.shape)) + 1e-12


def test_regression_matches_pinv_on_own_span(rng):
    # attacker data already lies in the row space of P: regression recovers it exactly
    pm = reduction.build_random_projection(10, 4, seed=2)
    xa = rng.standard_normal((25, 4)) @ pm.p
    rm = attack.attack_regression(pm, xa)
    out = attack.reconstruct(rm, reduction.project_dataset(pm, xa))
    assert np.allclose(out, xa, atol=1e-8)


def test_regression_intercept_learns_offset(rng):
    pm = reduction.from_sampling_indices([0], 2)
    a = rng.standard_normal(40)
    xa = np.column_stack([a, 2 * a + 5])
    rm = attack.attack_regression(pm, xa, intercept=True)
    assert np.allclose(rm.bias, [0, 5], atol=1e-10)
    assert np.allclose(rm.q[:, 0], [1, 2], atol=1e-10)
    out = attack.reconstruct(rm, xa[:, :1])
    assert np.allclose(out, xa, atol=1e-10)


def test_regression_centered_pca_targets_deviation(rng):
    xs = rng.standard_normal((50, 6)) + 3.0
    pm = reduction.fit_pca(xs, 6, center=True)
    rm = attack.attack_regression(pm, xs)
    assert np.allclose(rm.mean, pm.mean)
    out = attack.reconstruct(rm, reduction.project_dataset(pm, xs))
    assert np.allclose(out, xs, atol=1e-8)


def test_pinv_centered_pca_adds_mean_back(rng):
    xs = rng.standard_normal((50, 6)) + 3.0
    pm = reduction.fit_pca(xs, 6, center=True)
    out = attack.reconstruct(attack.attack_pinv(pm), reduction.project_dataset(pm, xs))
    assert np.allclose(out, xs, atol=1e-8)


def test_regression_row_cap_is_seeded(rng):
    pm = reduction.build_random_projection(8, 3, seed=0)
    xa = rng.standard_normal((200, 8))
    a = attack.attack_regression(pm, xa, row_cap=50, seed=4)
    b = attack.attack_regression(pm, xa, row_cap=50, seed=4)
    c = attack.attack_regression(pm, xa, row_cap=50, seed=5)
    assert a.rows_used == 50
    assert a.q.tobytes() == b.q.tobytes()
    assert not np.array_equal(a.q, c.q)
    assert attack.attack_regression(pm, xa, row_cap=None).rows_used == 200


def test_regression_errors():
    pm = reduction.from_sampling_indices([0], 3)
    with pytest.raises(ShapeError):
        attack.attack_regression(pm, np.ones((4, 2)))
    zeros_on_phi = np.column_stack([np.zeros(4), np.ones((4, 2))])
    with pytest.raises(NumericalError):
        attack.attack_regression(pm, zeros_on_phi)


def test_reconstruct_shape_error():
    rm = attack.attack_pinv(reduction.build_random_sampling(5, 2, 0))
    with pytest.raises(ShapeError):
        attack.reconstruct(rm, np.ones((3, 3)))


def test_attack_spec_validation():
    assert AttackSpec("pinv").kind is AttackKind.PINV
    with pytest.raises(ValueError):
        AttackSpec("regression")
    with pytest.raises(ValueError):
        AttackSpec("regression", attacker_dataset=np.empty((0, 3)))


def test_attacks_are_deterministic(rng):
    xa = rng.uniform(0, 1, (40, 20))
    pm = reduction.build_random_projection(20, 7, seed=9)
    assert attack.attack_pinv(pm).q.tobytes() == attack.attack_pinv(pm).q.tobytes()
    assert (
        attack.attack_regression(pm, xa).q.tobytes() == attack.attack_regression(pm, xa).q.tobytes()
    )


def test_regression_equals_least_squares_helper(rng):
    xa = rng.uniform(0, 1, (30, 10))
    pm = reduction.build_random_sampling(10, 4, seed=1)
    ya = reduction.project_dataset(pm, xa)
    expected = linalg.solve_least_squares(ya, xa).T
    assert np.allclose(attack.attack_regression(pm, xa).q, expected, atol=1e-12)
