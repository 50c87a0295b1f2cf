import csv
import json

import pytest

from hplab.cli import main
from hplab.verifier import CSV_COLUMNS

SQ = {"kind": "box", "lo": [0, 0], "hi": [1, 1]}
DISK = {"kind": "ball", "center": [0, 0], "radius": 1}
B3 = {"kind": "ball", "center": [0, 0, 0], "radius": 1}
SMALL = {"n": 64, "n_3d": 24}


def write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def run(tmp_path, cfg, *extra):
    return main(["run", "--config", write(tmp_path, cfg), "--out", str(tmp_path / "out"), *extra])


def test_empty_config_succeeds(tmp_path):
    assert run(tmp_path, {"jobs": []}) == 0
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["totals"]["rows"] == 0 and summary["seed"] == 0


@pytest.mark.parametrize(
    "cfg",
    [
        {"jobs": [], "verbose": True},
        {"jobs": [{"kind": "verify", "id": "a", "instance": {}, "function": {}, "colour": 1}]},
        {"jobs": [{"kind": "verify", "id": "a", "instance": {"kind": "SharpHardy", "domain": B3, "p": 2, "q": 1}, "function": {"kind": "bump", "center": [0, 0, 0], "radius": 0.5}}]},
        {"jobs": [{"kind": "teleport", "id": "a"}]},
    ],
    ids=["top", "job", "instance", "job-kind"],
)
def test_unknown_keys_abort_before_running(tmp_path, cfg):
    assert run(tmp_path, cfg) == 2
    assert not (tmp_path / "out").exists()


def test_duplicate_ids_rejected(tmp_path):
    job = {"kind": "verify", "id": "a", "instance": {"kind": "ClassicalPoincare", "domain": SQ, "p": 2}, "function": {"kind": "bump", "center": [0.5, 0.5], "radius": 0.3}}
    assert run(tmp_path, {"jobs": [job, job]}) == 2


def test_weight_hypothesis_exit_code_and_message(tmp_path, capsys):
    inst = {"kind": "GeneralWeighted", "domain": DISK, "p": 2, "weight": {"lambda": 1, "alpha": 2, "beta": 1, "x0": [0, 0]}}
    cfg = {"jobs": [{"kind": "verify", "id": "w", "instance": inst, "function": {"kind": "bump", "center": [0, 0], "radius": 0.5}}]}
    assert run(tmp_path, cfg) == 2
    assert "alpha*beta < N" in capsys.readouterr().err


def test_describe_sharp_hardy(tmp_path, capsys):
    cfg = {"jobs": [{"kind": "extremal", "id": "h", "instance": {"kind": "SharpHardy", "domain": B3, "p": 2}}]}
    assert main(["describe", "--config", write(tmp_path, cfg), "--job", "h"]) == 0
    out = capsys.readouterr().out
    assert "constant   4.0" in out and "sharp Hardy" in out


def test_describe_classical_poincare(tmp_path, capsys):
    cfg = {"jobs": [{"kind": "extremal", "id": "c", "instance": {"kind": "ClassicalPoincare", "domain": SQ, "p": 2}}]}
    assert main(["describe", "--config", write(tmp_path, cfg), "--job", "c"]) == 0
    line = next(s for s in capsys.readouterr().out.splitlines() if s.startswith("constant"))
    assert float(line.split()[1]) == pytest.approx(0.5, rel=1e-12)


def test_describe_rejects_increasing_radial_exponent(tmp_path, capsys):
    inst = {"kind": "VarExpRadial", "domain": DISK, "exponent": {"kind": "radial", "center": [0, 0], "a": 1, "b": 0.5}, "sigma": [1, 0]}
    cfg = {"jobs": [{"kind": "extremal", "id": "v", "instance": inst}]}
    assert main(["describe", "--config", write(tmp_path, cfg), "--job", "v"]) == 2
    assert main(["describe", "--config", write(tmp_path, {"jobs": []}), "--job", "v"]) == 2


def mixed_config():
    ascent = {
        "kind": "extremal",
        "id": "asc",
        "instance": {"kind": "DirectionalPoincare", "domain": {"kind": "box", "lo": [0], "hi": [1]}, "p": 1.5, "sigma": [1]},
        "method": "ascent",
        "n": 32,
        "steps": 15,
        "jitter": 0.05,
        "start": {"kind": "bump", "center": [0.5], "radius": 0.5},
    }
    verify = {
        "kind": "verify",
        "id": "gw",
        "instance": {"kind": "GeneralWeighted", "domain": DISK, "p": 2, "weight": {"lambda": 0.5, "alpha": 2, "beta": 0.7, "x0": [0, 0]}},
        "function": {"kind": "bump", "center": [0, 0], "radius": 0.9},
        "random_centers": 3,
    }
    return {"seed": 5, "grid": SMALL, "jobs": [ascent, verify]}


def test_reruns_are_byte_identical_and_seed_matters(tmp_path):
    cfg = write(tmp_path, mixed_config())
    bodies = []
    for out, seed in (("a", []), ("b", []), ("c", ["--seed", "6"])):
        assert main(["run", "--config", cfg, "--out", str(tmp_path / out), *seed]) == 0
        bodies.append({f: (tmp_path / out / f).read_bytes() for f in ("asc.csv", "gw.csv")})
    assert bodies[0] == bodies[1]
    assert bodies[0]["asc.csv"] != bodies[2]["asc.csv"]
    assert json.loads((tmp_path / "c" / "summary.json").read_text())["seed"] == 6
    rows = list(csv.reader(bodies[0]["gw.csv"].decode().splitlines()))
    assert tuple(rows[0]) == CSV_COLUMNS and len(rows) == 1 + 1 + 3


def test_workers_do_not_change_output(tmp_path):
    cfg = {"grid": SMALL, "jobs": [{"kind": "verify", "id": "h", "instance": {"kind": "SharpHardy", "domain": B3, "p": 2}, "function": {"kind": "bump", "center": [0.3, 0, 0], "radius": 0.4}}]}
    path = write(tmp_path, cfg)
    assert main(["run", "--config", path, "--out", str(tmp_path / "a")]) == 0
    assert main(["run", "--config", path, "--out", str(tmp_path / "b"), "--jobs", "4"]) == 0
    assert (tmp_path / "a" / "h.csv").read_bytes() == (tmp_path / "b" / "h.csv").read_bytes()


def test_failed_rows_give_exit_one(tmp_path):
    sweep = {
        "kind": "sweep",
        "id": "s",
        "instances": [{"kind": "ClassicalPoincare", "domain": SQ, "p": 2}],
        "functions": [{"kind": "bump", "center": [0.9, 0.5], "radius": 0.3}],
        "grid": SMALL,
    }
    assert run(tmp_path, {"jobs": [sweep]}) == 1
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["totals"]["errors"] == 1


def test_extremal_dump_and_sharpness_rows(tmp_path):
    ext = {"kind": "extremal", "id": "e", "instance": {"kind": "ClassicalPoincare", "domain": SQ, "p": 2}, "n": 16, "dump": True}
    sharp = {
        "kind": "sharpness",
        "id": "s",
        "instance": {"kind": "SharpHardy", "domain": B3, "p": 2},
        "family": {"kind": "hardy_family", "N": 3, "p": 2, "delta": 1e-4, "R": 1},
        "parameter": "eps",
        "values": [0.1, 0.05],
        "radial": True,
    }
    assert run(tmp_path, {"jobs": [ext, sharp]}) == 0
    out = tmp_path / "out"
    assert (out / "e.f64").exists() and json.loads((out / "e.f64.json").read_text())["shape"] == [17, 17]
    rows = list(csv.DictReader((out / "s.csv").read_text().splitlines()))
    assert [r["kind"] for r in rows] == ["extremal", "extremal"]
    assert float(rows[0]["ratio"]) < float(rows[1]["ratio"]) < 1
