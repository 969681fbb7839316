import csv
import io
import itertools
import random

import numpy as np
import pytest

import mobo


def test_hypervolume_and_front():
    assert mobo.hypervolume([[1.0, 2.0], [2.0, 1.0]], [0.0, 0.0]) == 3.0
    assert mobo.hypervolume([], [0.0, 0.0]) == 0.0
    f = mobo.ParetoFront([0.0, 0.0])
    assert f.insert([1.0, 3.0], "a")
    assert f.insert([3.0, 1.0], "b")
    assert not f.insert([0.5, 0.5])
    assert len(f) == 2
    assert sorted(f.ids()) == ["a", "b"]
    assert f.hypervolume() == 5.0
    assert f.hvi([2.0, 2.0]) == 1.0
    assert mobo.hvi([2.0, 2.0], [[1.0, 3.0], [3.0, 1.0]], [0.0, 0.0]) == 1.0
    assert mobo.non_dominated_indices([[1, 1], [2, 2], [0, 3]]) == [1, 2]
    with pytest.raises(mobo.UnsupportedDimension):
        mobo.hypervolume([[1.0] * 7], [0.0] * 7)
    with pytest.raises(mobo.MoboError):
        mobo.hypervolume([[1.0] * 7], [0.0] * 7)


def test_gp_interpolates_training_points():
    rng = np.random.default_rng(0)
    x = rng.uniform(size=(12, 2))
    y = np.column_stack([np.sin(3 * x[:, 0]), x[:, 1] ** 2])
    model = mobo.fit_gp(x, y, seed=1)
    assert model.num_objectives == 2
    np.testing.assert_allclose(model.predict_mean(x), y, atol=1e-3)
    mean, cov = model.predict(x[:3])
    assert mean.shape == (3, 2)
    assert len(cov) == 2 and cov[0].shape == (3, 3)
    assert np.all(np.diag(cov[0]) >= 0)
    assert "lengthscale" in model.hyperparameters()


def test_qpmhi_deterministic_posterior():
    mean = np.array([[2.0, 2.0], [0.5, 0.5], [1.5, 1.5]])
    cov = [np.zeros((3, 3)), np.zeros((3, 3))]
    r = mobo.qpmhi(mean, cov, [[1.0, 1.0]], [0.0, 0.0], num_draws=64, seed=3, q=2)
    assert r["probs"] == [1.0, 0.0, 0.0]
    assert r["improving_draws"] == 64
    assert r["selected"][0] == 0
    assert len(r["selected"]) == 2


def test_qpmhi_partition_on_random_posterior():
    rng = np.random.default_rng(5)
    n = 6
    mean = rng.normal(size=(n, 2))
    cov = []
    for _ in range(2):
        a = rng.normal(size=(n, n))
        cov.append(a @ a.T / n)
    r = mobo.qpmhi(mean, cov, [[0.0, 0.0]], [-3.0, -3.0], num_draws=500, seed=9)
    assert sum(r["counts"]) == r["improving_draws"]
    assert sum(r["probs"]) == pytest.approx(r["improving_fraction"], abs=1e-12)


def _write_pool(path, n):
    rng = random.Random(1)
    genomes = sorted({"".join(rng.choice("01") for _ in range(12)) for _ in range(n * 2)})[:n]
    with open(path, "w") as f:
        f.write("id,genome,obj_1,obj_2\n")
        for i, g in enumerate(genomes):
            ones = g.count("1") / 12
            f.write(f"p{i},{g},{ones!r},{(1 - ones) * (0.5 + int(g[:4], 2) / 30)!r}\n")


def test_run_campaign_and_bench(tmp_path):
    _write_pool(tmp_path / "pool.csv", 50)
    cfg = {
        "T": 3,
        "q": 3,
        "L": 32,
        "genome": {"kind": "bitstring", "length": 12},
        "featurizer": {"kind": "fixed_point", "num_vars": 3},
        "surrogate": {"num_starts": 2},
        "pool": str(tmp_path / "pool.csv"),
        "initial": {"random": 5},
        "oracle": {"kind": "table"},
        "seed": 2,
    }
    metrics, front = mobo.run_campaign(cfg)
    rows = list(csv.DictReader(io.StringIO(metrics)))
    assert [r["iteration"] for r in rows] == ["0", "1", "2", "3"]
    hv = [float(r["hv"]) for r in rows]
    assert all(a <= b for a, b in itertools.pairwise(hv))
    assert mobo.hypervolume([p["values"] for p in front["points"]], front["ref_point"]) == pytest.approx(hv[-1])
    assert mobo.run_campaign(cfg)[0] == metrics

    bad = dict(cfg, q=51)
    with pytest.raises(mobo.InvalidInput, match="q"):
        mobo.run_campaign(bad)

    spec = {
        "pool": "pool.csv",
        "genome": cfg["genome"],
        "featurizer": cfg["featurizer"],
        "surrogate": cfg["surrogate"],
        "acquisitions": ["qpmhi", "random"],
        "seeds": [1],
        "T": 2,
        "q": 3,
        "L": 32,
        "initial_size": 5,
    }
    agg = list(csv.DictReader(io.StringIO(mobo.run_bench(spec, base_dir=str(tmp_path)))))
    assert [(r["acquisition"], r["iteration"]) for r in agg] == [
        ("qpmhi", "0"), ("qpmhi", "1"), ("qpmhi", "2"), ("random", "0"), ("random", "1"), ("random", "2")]
    assert agg[0]["hv_mean"] == agg[3]["hv_mean"]
