import json
import math

import numpy as np
import pytest

from qmchain import cli
from qmchain.cli import fmt_float, main, to_json
from qmchain.linalg import NumericError

ANGLE = math.pi / 4


def write_spec(tmp_path, steps, name="spec.json", **extra):
    doc = {"d": 2, "preparation": {"mode": "unprepared"}, "steps": steps, **extra}
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def bench_steps(amplify_second=False):
    second = {"unitary": {"qubit_angle": ANGLE}}
    if amplify_second:
        second["amplify"] = True
    return [{}, second, {"unitary": {"qubit_angle": ANGLE}}]


def run_json(args, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main(args + ["--out", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


# ---------------------------------------------------------------- format


def test_fmt_float():
    assert fmt_float(1.0) == "1.0"
    assert fmt_float(-0.0) == "0.0"
    assert fmt_float(0.1) == "0.10000000000000001"
    assert fmt_float(1e-20) == "9.9999999999999995e-21"
    with pytest.raises(NumericError):
        fmt_float(float("nan"))


def test_to_json_round_trip():
    obj = {"b": [1, 2.5, None, True], "a": {"y": np.float64(1 / 3), "x": "s"}}
    text = to_json(obj)
    assert text.index('"a"') < text.index('"b"')
    back = json.loads(text)
    assert back["a"]["y"] == 1 / 3 and back["b"] == [1, 2.5, None, True]


# ------------------------------------------------------------------- run


def test_run_benchmark_venn(tmp_path):
    spec = write_spec(tmp_path, bench_steps())
    code, rep = run_json(["run", spec, "--venn", "A1,A2,A3", "--keep", "A1,A2,A3", "--bits"], tmp_path)
    assert code == 0
    assert abs(rep["entropy"]["entries"]["A1,A2,A3"] - 2) < 1e-9
    v = rep["venn"][0]
    assert v["sets"] == ["A1", "A2", "A3"]
    assert abs(v["regions"]["joint"] - 2) < 1e-9
    m = np.array(rep["reduced"]["A1,A2,A3"])
    assert m.shape == (8, 8, 2)
    assert abs(sum(m[i, i, 0] for i in range(8)) - 1) < 1e-12
    assert rep["tool"] == "qmchain" and "version" in rep and rep["seed"] == 0


def test_run_amplified_second_step(tmp_path):
    spec = write_spec(tmp_path, bench_steps(amplify_second=True))
    code, rep = run_json(["run", spec, "--keep", "A1,A2,A3", "--bits"], tmp_path)
    assert code == 0
    assert abs(rep["entropy"]["entries"]["A1,A2,A3"] - 3) < 1e-9


def test_run_empty_steps(tmp_path):
    spec = write_spec(tmp_path, [])
    code, rep = run_json(["run", spec, "--bits"], tmp_path)
    assert code == 0
    entries = rep["entropy"]["entries"]
    assert abs(entries["Q"] - 1) < 1e-12 and abs(entries["R"] - 1) < 1e-12


def test_run_theorems(tmp_path):
    spec = write_spec(tmp_path, bench_steps())
    code, rep = run_json(["run", spec, "--theorems", "T2,T1"], tmp_path)
    assert code == 0
    by_id = {t["theorem"]: t for t in rep["theorems"]}
    assert by_id["T2"]["verdict"] is True
    assert "skipped" in by_id["T1"]


def test_run_is_byte_identical(tmp_path):
    spec = write_spec(tmp_path, bench_steps())
    args = ["run", spec, "--venn", "A1,A2,A3", "--keep", "A1,A3", "--theorems", "all"]
    main(args + ["--out", str(tmp_path / "a.json")])
    main(args + ["--out", str(tmp_path / "b.json")])
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_run_malformed_spec(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", str(bad)]) == 2
    assert main(["run", str(tmp_path / "missing.json")]) == 2
    nonunitary = write_spec(tmp_path, [{"unitary": {"matrix": [[1, 1], [0, 1]]}}], "nu.json")
    assert main(["run", nonunitary]) == 2


def test_run_bad_label(tmp_path):
    spec = write_spec(tmp_path, bench_steps())
    assert main(["run", spec, "--keep", "A9"]) == 2
    assert main(["run", spec, "--venn", "A1,A2"]) == 2


def test_run_dimension_guard(tmp_path, monkeypatch):
    spec = write_spec(tmp_path, bench_steps())
    monkeypatch.setenv("QMC_MAX_DIM", "4")
    assert main(["run", spec]) == 3


def test_run_numeric_failure(tmp_path, monkeypatch):
    spec = write_spec(tmp_path, bench_steps())

    def boom(_):
        raise NumericError("norm drift")

    monkeypatch.setattr(cli, "run_chain", boom)
    assert main(["run", spec]) == 4


def test_usage_errors():
    assert main([]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["--version"]) == 0


# ---------------------------------------------------------------- verify


def test_verify_all_qubits(tmp_path):
    code, rep = run_json(["verify", "--trials", "200", "--seed", "42", "--d", "2", "--max-steps", "4"], tmp_path)
    assert code == 0 and rep["ok"]
    for tid, entry in rep["theorems"].items():
        assert entry["passed"] == entry["trials"] == 200, tid
        if entry["kind"] == "equality":
            assert entry["max_abs_gap"] < 1e-9


def test_verify_markov_distribution(tmp_path):
    code, rep = run_json(["verify", "--theorems", "markov", "--trials", "50"], tmp_path)
    assert code == 0
    nm = rep["theorems"]["NM"]
    assert nm["kind"] == "interval"
    assert -1e-9 <= nm["min_gap"] <= nm["max_gap"] <= 1 + 1e-9
    assert set(nm["gap_quantiles"]) == {"0", "0.25", "0.5", "0.75", "1"}


def test_verify_usage_errors():
    assert main(["verify", "--trials", "0"]) == 2
    assert main(["verify", "--theorems", "T42"]) == 2
    assert main(["verify", "--d", "1"]) == 2


def test_verify_skips_short_chains(tmp_path):
    code, rep = run_json(["verify", "--theorems", "T2,L1", "--trials", "5", "--max-steps", "2"], tmp_path)
    assert code == 0
    assert "skipped" in rep["theorems"]["T2"]
    assert rep["theorems"]["L1"]["passed"] == 5


def test_verify_workers_match_serial(tmp_path):
    base = ["verify", "--theorems", "T1,NM", "--trials", "16"]
    main(base + ["--out", str(tmp_path / "s.json")])
    main(base + ["--workers", "2", "--out", str(tmp_path / "p.json")])
    assert (tmp_path / "s.json").read_bytes() == (tmp_path / "p.json").read_bytes()


def test_verify_reports_failure(monkeypatch, tmp_path):
    real = cli.verify_theorem

    def flaky(spec, tid, *a, **kw):
        r = real(spec, tid, *a, **kw)
        return type(r)(**{**r.__dict__, "verdict": False})

    monkeypatch.setattr(cli, "verify_theorem", flaky)
    code, rep = run_json(["verify", "--theorems", "L1", "--trials", "3"], tmp_path)
    assert code == 1 and not rep["ok"] and rep["theorems"]["L1"]["failures"] == [0, 1, 2]


# ----------------------------------------------------------------- apps


def read_csv(path):
    lines = path.read_text().strip().splitlines()
    return lines[0].split(","), [l.split(",") for l in lines[1:]]


def test_zeno_cli(tmp_path):
    out = tmp_path / "z.csv"
    assert main(["zeno", "--p", "1", "--n", "1000", "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["step", "q", "entropy_bits"]
    assert len(rows) == 1001
    assert abs(float(rows[-1][1]) - 1) < 1e-3


def test_zeno_anti_cli(tmp_path):
    out = tmp_path / "a.csv"
    assert main(["zeno", "--anti", "--n", "3", "--trials", "20000", "--seed", "2", "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["n", "analytic", "mc_mean", "mc_stderr"]
    for n, analytic, mean, se in rows:
        assert abs(float(mean) - float(analytic)) < 4 * float(se)


def test_zeno_bad_args():
    assert main(["zeno", "--p", "2"]) == 2
    assert main(["zeno", "--n", "0"]) == 2


def test_eraser_cli(tmp_path):
    out = tmp_path / "e.csv"
    assert main(["eraser", "--theta", "0", "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["x", "intensity", "visibility"]
    assert len(rows) == 256
    assert all(abs(float(r[2])) < 1e-9 for r in rows)
    assert main(["eraser", "--outcome", "none", "--n-x", "64", "--out", str(out)]) == 0
    assert main(["eraser", "--n-x", "2"]) == 2


def test_prepare_cli(tmp_path):
    code, rep = run_json(["prepare", "--angle", "0.785398", "--outcome", "0"], tmp_path)
    assert code == 0
    rho = np.array(rep["rho"])[..., 0]
    assert np.allclose(rho, np.eye(2) / 2, atol=1e-6)
    assert rep["d"] == 2 and abs(rep["entropy_bits"] - 1) < 1e-9


def test_prepare_matrix_cli(tmp_path):
    mat = json.dumps([[[0, 0], [1, 0]], [[1, 0], [0, 0]]])
    code, rep = run_json(["prepare", "--matrix", mat, "--outcome", "1"], tmp_path)
    assert code == 0
    assert rep["probabilities"] == [1.0, 0.0]
    assert main(["prepare", "--matrix", "[[1, 1], [0, 1]]"]) == 2
    assert main(["prepare", "--matrix", "nope"]) == 2
