import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from reconbench import attack, classify, metrics, reduction
from reconbench.errors import ShapeError, UndefinedMetricError


def naive_mse(a, b):
    total = 0.0
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            total += (a[i, j] - b[i, j]) ** 2
    return total / a.size


def test_mse_identical_is_zero(rng):
    x = rng.standard_normal((3, 5))
    assert metrics.mse(x, x) == 0.0


def test_mse_single_coordinate():
    assert metrics.mse([[0, 0, 0, 0]], [[0, 2, 0, 0]]) == 1.0


def test_mse_matches_naive_oracle(rng):
    a, b = rng.standard_normal((20, 30)), rng.standard_normal((20, 30))
    assert abs(metrics.mse(a, b) - naive_mse(a, b)) < 1e-12


finite = st.floats(-1e3, 1e3, allow_nan=False)


@given(arrays(np.float64, (4, 6), elements=finite), arrays(np.float64, (4, 6), elements=finite), st.floats(-10, 10))
def test_mse_symmetry_and_scaling(a, b, c):
    assert metrics.mse(a, b) == metrics.mse(b, a)
    base = metrics.mse(a, b)
    assert abs(metrics.mse(c * a, c * b) - c * c * base) <= 1e-12 * max(1.0, c * c * base)


def test_mse_errors():
    with pytest.raises(ShapeError):
        metrics.mse(np.zeros((2, 2)), np.zeros((2, 3)))
    with pytest.raises(ShapeError):
        metrics.mse(np.zeros((0, 2)), np.zeros((0, 2)))


def test_arr_examples():
    assert metrics.arr(0.7, 0.7) == 0.0
    assert metrics.arr(0.8, 0.4) == pytest.approx(0.5, abs=1e-12)
    assert metrics.arr(0.8, 0.9) == pytest.approx(-0.125, abs=1e-12)


def test_arr_errors():
    with pytest.raises(UndefinedMetricError):
        metrics.arr(0.0, 0.3)
    with pytest.raises(ValueError):
        metrics.arr(1.2, 0.3)


@given(st.floats(0.01, 1.0), st.floats(0.0, 1.0))
def test_arr_formula(a, b):
    assert abs(metrics.arr(a, b) - (a - b) / a) <= 1e-12


def _theta(xs, ys):
    return classify.train("logistic_regression", xs, ys)


def test_evaluate_attack_lossless(rng):
    xs = rng.uniform(0, 1, (40, 6))
    ys = (xs[:, 0] > 0.5).astype(int)
    theta = _theta(xs, ys)
    pm = reduction.build_random_sampling(6, 6, seed=2)
    report, recon = metrics.evaluate_attack(xs, ys, pm, attack.attack_pinv(pm), theta)
    assert report.mse < 1e-8
    assert abs(report.arr) < 1e-9
    assert report.method == "random_sampling" and report.k == 6 and report.attack == "pinv"
    assert recon.shape == xs.shape


def test_evaluate_attack_all_ones_half_sampled():
    xs = np.ones((10, 8))
    ys = np.arange(10) % 2
    theta = _theta(np.vstack([xs, np.zeros((10, 8))]), np.r_[np.zeros(10, int), np.ones(10, int)])
    pm = reduction.build_random_sampling(8, 4, seed=5)
    report, _ = metrics.evaluate_attack(xs, ys, pm, attack.attack_pinv(pm), theta)
    assert report.mse == 0.5


def test_evaluate_attack_discriminative_pixel_removed():
    rng = np.random.default_rng(0)
    n = 100
    ys = np.arange(n) % 2
    xs = rng.uniform(0.4, 0.6, (n, 5))
    xs[:, 0] = ys  # the only informative coordinate
    theta = _theta(xs, ys)
    pm = reduction.from_sampling_indices([1, 2, 3, 4], 5)
    report, _ = metrics.evaluate_attack(xs, ys, pm, attack.attack_pinv(pm), theta)
    assert report.acc_original == 1.0
    assert report.arr > 0


def test_evaluate_attack_records_undefined_arr():
    xs = np.array([[0.0], [1.0]])
    theta = _theta(xs, np.array([0, 1]))
    pm = reduction.build_random_sampling(1, 1, seed=0)
    report, _ = metrics.evaluate_attack(xs, np.array([1, 0]), pm, attack.attack_pinv(pm), theta)
    assert report.acc_original == 0.0
    assert report.arr is None and report.notes


def test_evaluate_attack_clip_and_shape_checks(rng):
    xs = rng.uniform(0, 1, (20, 4))
    ys = np.arange(20) % 2
    theta = _theta(xs, ys)
    pm = reduction.build_random_projection(4, 2, seed=1)
    _, recon = metrics.evaluate_attack(xs, ys, pm, attack.attack_pinv(pm), theta, clip_reconstruction=True)
    assert recon.min() >= 0 and recon.max() <= 1
    with pytest.raises(ShapeError):
        metrics.evaluate_attack(xs, ys[:5], pm, attack.attack_pinv(pm), theta)
    small_theta = _theta(xs[:, :3], ys)
    with pytest.raises(ShapeError):
        metrics.evaluate_attack(xs, ys, pm, attack.attack_pinv(pm), small_theta)
