"""End-to-end tests of the mobo command-line tool."""
import csv
import io
import json
import os
import random
import subprocess
import sys
from pathlib import Path

import pytest

MOBO = os.environ.get("MOBO_CLI", "mobo")
DATA = Path(__file__).resolve().parent.parent / "data"
C1 = (0.21, 0.34)
C2 = (0.79, 0.62)


def mobo(*args, cwd=None):
    return subprocess.run([MOBO, *map(str, args)], capture_output=True, text=True, cwd=cwd)


def decode(genome, num_vars=2):
    w = len(genome) // num_vars
    return [int(genome[i * w:(i + 1) * w], 2) / (2**w - 1) for i in range(num_vars)]


def sphere_pair(genome):
    x = decode(genome)
    return (-sum((a - c) ** 2 for a, c in zip(x, C1)), -sum((a - c) ** 2 for a, c in zip(x, C2)))


def write_pool(path, n, seed, labeled=True):
    rng = random.Random(seed)
    genomes = set()
    while len(genomes) < n:
        genomes.add("".join(rng.choice("01") for _ in range(16)))
    rows = []
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["id", "genome", "obj_1", "obj_2"] if labeled else ["id", "genome"])
        for i, g in enumerate(sorted(genomes)):
            y = sphere_pair(g)
            rows.append((f"p{i}", g, y))
            w.writerow([f"p{i}", g, repr(y[0]), repr(y[1])] if labeled else [f"p{i}", g])
    return rows


def true_pareto(rows):
    def dom(a, b):
        return all(x >= y for x, y in zip(a, b)) and any(x > y for x, y in zip(a, b))

    return {i for i, _, y in rows if not any(dom(z, y) for _, _, z in rows)}


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


def campaign(tmp_path, **overrides):
    cfg = {
        "T": 4,
        "q": 3,
        "L": 32,
        "genome": {"kind": "bitstring", "length": 16},
        "featurizer": {"kind": "fixed_point", "num_vars": 2},
        "surrogate": {"num_starts": 2},
        "pool": "pool.csv",
        "initial": {"random": 6},
        "oracle": {"kind": "table"},
        "seed": 11,
        "output_dir": "out",
    }
    cfg.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def union_area(rects):
    """Area of a union of origin-anchored rectangles by grid decomposition."""
    xs = sorted({0.0, *[r[0] for r in rects]})
    ys = sorted({0.0, *[r[1] for r in rects]})
    area = 0.0
    for i in range(len(xs) - 1):
        for j in range(len(ys) - 1):
            cx, cy = (xs[i] + xs[i + 1]) / 2, (ys[j] + ys[j + 1]) / 2
            if any(cx < r[0] and cy < r[1] for r in rects):
                area += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j])
    return area


def test_hv(tmp_path):
    f = tmp_path / "f.json"
    f.write_text(json.dumps({"ref_point": [0, 0], "points": [{"values": [1, 1]}]}))
    assert mobo("hv", f, "--ref", "0,0").stdout.strip() == "1"
    f.write_text(json.dumps([]))
    assert mobo("hv", f, "--ref", "0,0").stdout.strip() == "0"
    f.write_text(json.dumps([[1, 2], [2, 1]]))
    r = mobo("hv", f, "--ref", "0,0")
    assert r.returncode == 0
    assert float(r.stdout) == union_area([(1, 2), (2, 1)]) == 3.0
    f.write_text(json.dumps([[1] * 7]))
    r = mobo("hv", f, "--ref", ",".join(["0"] * 7))
    assert r.returncode == 2
    assert "6" in r.stderr
    f.write_text("{not json")
    assert mobo("hv", f, "--ref", "0,0").returncode == 2


def test_run_outputs_and_idempotence(tmp_path):
    write_pool(tmp_path / "pool.csv", 60, 1)
    cfg = campaign(tmp_path)
    assert mobo("run", cfg).returncode == 0
    out = tmp_path / "out"
    rows = read_csv(out / "metrics.csv")
    assert rows[0] == ["iteration", "hv", "relative_hvi", "fraction_recovered", "batch_ids"]
    assert [r[0] for r in rows[1:]] == ["1", "2", "3", "4"]
    front = json.loads((out / "front.json").read_text())
    assert float(mobo("hv", out / "front.json").stdout) == pytest.approx(float(rows[-1][1]), rel=1e-15)
    assert len(front["points"]) >= 1
    snapshot = {p: (out / p).read_bytes() for p in ("metrics.csv", "front.json", "checkpoint.json")}
    assert mobo("run", cfg).returncode == 0
    for p, data in snapshot.items():
        assert (out / p).read_bytes() == data


def test_resume_matches_uninterrupted_run(tmp_path):
    write_pool(tmp_path / "pool.csv", 60, 2)
    cfg = campaign(tmp_path, T=5)
    assert mobo("run", cfg).returncode == 0
    full = (tmp_path / "out" / "metrics.csv").read_bytes()
    assert mobo("run", cfg, "--stop-after", 2).returncode == 0
    assert json.loads((tmp_path / "out" / "checkpoint.json").read_text())["iteration"] == 2
    assert len(read_csv(tmp_path / "out" / "metrics.csv")) == 3
    r = mobo("run", cfg, "--resume")
    assert r.returncode == 0, r.stderr
    assert (tmp_path / "out" / "metrics.csv").read_bytes() == full


def test_validation_errors(tmp_path):
    write_pool(tmp_path / "pool.csv", 20, 3)
    r = mobo("run", campaign(tmp_path, q=21))
    assert r.returncode == 2
    assert "q (21)" in r.stderr
    r = mobo("run", campaign(tmp_path, surprise=1))
    assert r.returncode == 2
    assert "surprise" in r.stderr
    r = mobo("run", campaign(tmp_path), "--resume")
    assert r.returncode == 2
    assert mobo("run", tmp_path / "missing.json").returncode == 2
    assert mobo("frobnicate").returncode == 2


def test_oracle_failure_keeps_checkpoint(tmp_path):
    marker = tmp_path / "called"
    command = f'test -e {marker} && exit 4; touch {marker}; exec {sys.executable} {DATA / "echo_oracle.py"} ones'
    cfg = campaign(
        tmp_path,
        N=20,
        pool=None,
        generator={},
        oracle={"kind": "external", "command": command},
    )
    data = json.loads(cfg.read_text())
    del data["pool"]
    cfg.write_text(json.dumps(data))
    r = mobo("run", cfg)
    assert r.returncode == 1
    assert "iteration 1" in r.stderr
    ckpt = json.loads((tmp_path / "out" / "checkpoint.json").read_text())
    assert ckpt["iteration"] == 0
    assert len(ckpt["dataset"]) == 6


def test_select_matches_next_iteration(tmp_path):
    write_pool(tmp_path / "pool.csv", 60, 4)
    cfg = campaign(tmp_path, T=3)
    assert mobo("run", cfg).returncode == 0
    batch3 = read_csv(tmp_path / "out" / "metrics.csv")[3][4].split(";")
    assert mobo("run", cfg, "--stop-after", 2).returncode == 0
    r = mobo("select", tmp_path / "pool.csv", tmp_path / "out" / "checkpoint.json", "-q", 3,
             "--summary", tmp_path / "summary.json")
    assert r.returncode == 0, r.stderr
    rows = list(csv.reader(io.StringIO(r.stdout)))
    assert rows[0] == ["candidate_id", "prob", "pareto_membership", "selected_rank"]
    assert len(rows) == 61
    ranked = sorted((int(row[3]), row[0]) for row in rows[1:] if row[3])
    assert [i for _, i in ranked] == batch3
    assert sum(float(row[1]) for row in rows[1:]) <= 1.0 + 1e-12
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["L"] == 32 and summary["seed"] == 11


def test_bench(tmp_path):
    rows = write_pool(tmp_path / "pool.csv", 80, 5)
    truth = true_pareto(rows)
    spec = {
        "pool": "pool.csv",
        "genome": {"kind": "bitstring", "length": 16},
        "featurizer": {"kind": "fixed_point", "num_vars": 2},
        "surrogate": {"num_starts": 2},
        "acquisitions": ["qpmhi", "random"],
        "seeds": [1, 2],
        "T": 3,
        "q": 4,
        "L": 32,
        "initial_size": 6,
        "true_pareto_ids": sorted(truth),
        "output_dir": "bench",
    }
    (tmp_path / "spec.json").write_text(json.dumps(spec))
    r = mobo("bench", tmp_path / "spec.json", "--workers", 2)
    assert r.returncode == 0, r.stderr
    agg = read_csv(tmp_path / "bench" / "aggregate.csv")
    assert agg[0] == ["acquisition", "iteration", "n", "hv_mean", "hv_ci95",
                      "fraction_recovered_mean", "fraction_recovered_ci95"]
    series = {a: [row for row in agg[1:] if row[0] == a] for a in ("qpmhi", "random")}
    assert [row[1] for row in series["qpmhi"]] == [row[1] for row in series["random"]] == ["0", "1", "2", "3"]
    for acq, ser in series.items():
        cells = [read_csv(tmp_path / "bench" / "cells" / f"{acq}_seed{s}.csv") for s in (1, 2)]
        for t, row in enumerate(ser):
            assert float(row[3]) == pytest.approx(sum(float(c[t + 1][1]) for c in cells) / 2, rel=1e-12)
            assert float(row[5]) == pytest.approx(sum(float(c[t + 1][3]) for c in cells) / 2, rel=1e-12)
    first = (tmp_path / "bench" / "aggregate.csv").read_bytes()
    assert mobo("bench", tmp_path / "spec.json").returncode == 0
    assert (tmp_path / "bench" / "aggregate.csv").read_bytes() == first

    spec["true_pareto_ids"] = sorted(truth)[:-1]
    (tmp_path / "spec.json").write_text(json.dumps(spec))
    assert mobo("bench", tmp_path / "spec.json").returncode == 2

    write_pool(tmp_path / "unlabeled.csv", 40, 6, labeled=False)
    spec["pool"] = "unlabeled.csv"
    del spec["true_pareto_ids"]
    (tmp_path / "spec.json").write_text(json.dumps(spec))
    r = mobo("bench", tmp_path / "spec.json")
    assert r.returncode == 2
    assert "labeled" in r.stderr
