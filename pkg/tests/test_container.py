import numpy as np
import pytest

from reconbench import attack, container, reduction
from reconbench.errors import DataError


def test_dumps_loads_round_trip(rng):
    arrays = {"a": rng.standard_normal((3, 4)), "v": np.arange(5.0)}
    buf = container.dumps({"x": 1, "name": "t"}, arrays)
    meta, back = container.loads(buf)
    assert meta == {"x": 1, "name": "t"}
    assert np.array_equal(back["a"], arrays["a"])
    assert back["v"].shape == (1, 5)


def test_bytes_are_deterministic(rng):
    a = rng.standard_normal((2, 2))
    assert container.dumps({"b": 1, "a": 2}, {"m": a}) == container.dumps({"a": 2, "b": 1}, {"m": a})


def test_rejects_bad_magic_and_truncation(rng):
    buf = container.dumps({}, {"m": rng.standard_normal((4, 4))})
    with pytest.raises(DataError):
        container.loads(b"XXXX" + buf[4:])
    with pytest.raises(DataError):
        container.loads(buf[:-10])


def test_projection_round_trip(rng, tmp_path):
    xs = rng.standard_normal((20, 6))
    for pm in (
        reduction.build_random_sampling(6, 3, seed=1),
        reduction.build_random_projection(6, 3, seed=1, variance_mode="paper_literal"),
        reduction.fit_pca(xs, 3, center=True),
    ):
        back = container.projection_from_bytes(container.projection_to_bytes(pm))
        assert back.spec == pm.spec
        assert np.array_equal(back.p, pm.p)
        assert (back.phi is None) == (pm.phi is None)
        if pm.phi is not None:
            assert np.array_equal(back.phi, pm.phi)
        if pm.mean is not None:
            assert np.array_equal(back.mean, pm.mean)


def test_reconstruction_round_trip(rng, tmp_path):
    xs = rng.uniform(0, 1, (30, 5)) + 1
    pm = reduction.fit_pca(xs, 2, center=True)
    rm = attack.attack_regression(pm, xs, dataset_id="train", intercept=True)
    path = tmp_path / "q.rbmx"
    path.write_bytes(container.reconstruction_to_bytes(rm))
    back = container.reconstruction_from_bytes(path.read_bytes())
    assert np.array_equal(back.q, rm.q) and np.array_equal(back.bias, rm.bias)
    assert np.array_equal(back.mean, rm.mean)
    assert back.kind is rm.kind and back.attacker_dataset_id == "train" and back.rows_used == 30
    with pytest.raises(DataError):
        container.projection_from_bytes(path.read_bytes())
