import csv
import json
import math

import numpy as np
import pytest

from fracext import cli
from fracext.cli import RunConfig, main, study_points
from fracext.errors import NumericError


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_oracle_default(tmp_path):
    assert run(tmp_path, "oracle", "--f", "1:1", "--s", "1.5") == 0
    rows = read_csv(tmp_path / "oracle.csv")
    assert rows[0] == ["k", "F_k", "U_k", "lambda"]
    assert rows[1][0] == "1" and rows[1][2].startswith("0.0322515344")
    assert float(rows[1][2]) == pytest.approx(math.pi**-3, rel=1e-15)
    summary = json.loads((tmp_path / "oracle.json").read_text())
    assert summary["u_norm_s"] == pytest.approx(math.pi**-1.5, rel=1e-14)


def test_oracle_empty(tmp_path):
    assert run(tmp_path, "oracle", "--f", "") == 0
    assert read_csv(tmp_path / "oracle.csv") == [["k", "F_k", "U_k", "lambda"]]
    summary = json.loads((tmp_path / "oracle.json").read_text())
    assert summary["u_norm_s"] == 0.0 and summary["f_norm_minus_s"] == 0.0


def test_oracle_square(tmp_path):
    assert run(tmp_path, "oracle", "--domain", "square", "--f", "1,2:1,2,1:1") == 0
    rows = read_csv(tmp_path / "oracle.csv")[1:]
    assert len(rows) == 2
    for r in rows:
        assert float(r[3]) == pytest.approx(5 * math.pi**2, rel=1e-15)


@pytest.mark.parametrize("text", ["0:1", "1:1,", "1:a", "1:1,1:2"])
def test_parse_failure(tmp_path, capsys, text):
    assert run(tmp_path, "oracle", "--f", text) == 4
    assert "position" in capsys.readouterr().err


def test_bad_flag_values(tmp_path):
    assert run(tmp_path, "oracle", "--s", "2.5") == 4
    assert run(tmp_path, "solve", "--Nx", "abc") == 4
    assert run(tmp_path, "oracle", "--s", "1.2,1.4") == 4
    with pytest.raises(SystemExit) as info:
        main(["oracle", "--no-such-flag"])
    assert info.value.code == 4


def test_psi_table(tmp_path):
    assert run(tmp_path, "psi", "--s", "1.5", "--zmax", "4", "--nz", "4") == 0
    rows = read_csv(tmp_path / "psi.csv")
    assert rows[0] == ["z", "psi", "residual"]
    assert rows[1][:2] == ["0", "1"]
    z = np.array([float(r[0]) for r in rows[2:]])
    assert np.allclose([float(r[1]) for r in rows[2:]], (1 + z) * np.exp(-z), rtol=1e-13)
    assert max(abs(float(r[2])) for r in rows[2:]) < 1e-13


def test_truncation_outputs(tmp_path):
    assert run(tmp_path, "truncation", "--Y", "1", "--f", "1:1,2:0.5") == 0
    rows = read_csv(tmp_path / "truncation.csv")
    assert rows[0] == ["k", "lambda", "I_tail", "contribution"] and len(rows) == 3
    summary = json.loads((tmp_path / "truncation.json").read_text())
    assert summary["tail_norm"] > 0 and summary["bound"] > 0


def test_truncation_slope(tmp_path):
    tails = []
    for Y in (1.0, 2.0):
        out = tmp_path / str(Y)
        assert main(["truncation", "--Y", str(Y), "--out", str(out)]) == 0
        tails.append(json.loads((out / "truncation.json").read_text())["tail_norm"])
    slope = math.log(tails[1] / tails[0]) / 1.0
    assert slope <= -0.9 * math.pi / 2


def test_truncation_zero_data(tmp_path):
    assert run(tmp_path, "truncation", "--f", "", "--Y", "1") == 0
    assert read_csv(tmp_path / "truncation.csv") == [["k", "lambda", "I_tail", "contribution"]]


def test_small_Y(tmp_path, capsys):
    assert run(tmp_path, "truncation", "--Y", "0.2") == 2
    assert "1/sqrt(lambda_1)" in capsys.readouterr().err
    assert run(tmp_path, "truncation", "--Y", "0.2", "--allow-small-Y") == 0
    assert run(tmp_path, "solve", "--Y", "0.2") == 2


def test_solve_defaults(tmp_path):
    assert run(tmp_path / "a", "solve") == 0
    assert run(tmp_path / "b", "solve", "--Nx", "8", "--M", "8") == 0
    fine = json.loads((tmp_path / "a" / "summary.json").read_text())
    coarse = json.loads((tmp_path / "b" / "summary.json").read_text())
    assert math.isfinite(fine["record"]["err_hs"])
    assert fine["record"]["err_hs"] < coarse["record"]["err_hs"]
    assert fine["record"]["residual"] <= 1e-10
    assert fine["mesh"]["Nx"] == 16 and fine["mesh"]["gamma"] == 2.0
    trace = read_csv(tmp_path / "a" / "trace.csv")
    assert trace[0] == ["x", "value", "derivative"] and len(trace) == 66
    sol = read_csv(tmp_path / "a" / "solution.csv")
    assert sol[0] == ["x", "y", "value"]
    assert not (tmp_path / "a" / "A.coo").exists()


def test_solve_dump_matrices(tmp_path):
    assert run(tmp_path, "solve", "--Nx", "4", "--M", "4", "--dump-matrices") == 0
    for name in ("A", "Mx", "Kx", "Dx", "My", "Cy", "By"):
        data = np.loadtxt(tmp_path / f"{name}.coo", ndmin=2)
        assert data.shape[1] == 3 and data.shape[0] > 0
    a = np.loadtxt(tmp_path / "A.coo")
    assert a[:, :2].max() == (2 * 5 - 2) * (2 * 5 - 3) - 1


def test_solve_rejects_square_and_bad_index(tmp_path):
    assert run(tmp_path, "solve", "--domain", "square") == 4
    assert run(tmp_path, "solve", "--f", "0:1") == 4


def test_numeric_failure_exit(tmp_path, capsys, monkeypatch):
    def boom(*args, **kwargs):
        raise NumericError("did not converge", 3.5e-4)

    monkeypatch.setattr(cli, "solve_problem", boom)
    assert run(tmp_path, "solve") == 3
    assert "3.500e-04" in capsys.readouterr().err


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# study plan\ns = 1.25\nf = 1:1, 2:0.5\nY = 2\nNx = 4\nM = 4\n")
    assert main(["oracle", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    rows = read_csv(tmp_path / "o" / "oracle.csv")
    assert len(rows) == 3
    assert float(rows[1][2]) == pytest.approx(math.pi**-2.5, rel=1e-14)
    assert main(["oracle", "--config", str(cfg), "--s", "1.5", "--out", str(tmp_path / "p")]) == 0
    rows = read_csv(tmp_path / "p" / "oracle.csv")
    assert float(rows[1][2]) == pytest.approx(math.pi**-3, rel=1e-14)


def test_bad_config(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("s 1.5\n")
    assert main(["oracle", "--config", str(cfg)]) == 4
    cfg.write_text("colour = blue\n")
    assert main(["oracle", "--config", str(cfg)]) == 4
    assert main(["oracle", "--config", str(tmp_path / "missing.cfg")]) == 4


def test_study_single(tmp_path):
    assert run(tmp_path, "study", "--Nx", "4", "--M", "4", "--Y", "2") == 0
    rows = read_csv(tmp_path / "study.csv")
    assert rows[0] == ["s", "Y", "gamma", "Nx", "M", "err_hs", "err_l2", "energy", "eoc_hs", "wall_ms"]
    assert len(rows) == 2


def test_study_dyadic_eoc(tmp_path):
    assert run(tmp_path, "study", "--Nx", "8", "--M", "4,8,16", "--Y", "2") == 0
    rows = read_csv(tmp_path / "study.csv")[1:]
    assert [r[4] for r in rows] == ["4", "8", "16"]
    assert rows[0][8] == "" and rows[1][8] != "" and rows[2][8] != ""


def test_study_y_sweep_sidecar(tmp_path):
    assert run(tmp_path, "study", "--Nx", "16", "--M", "16", "--Y", "1,1.5,2") == 0
    meta = json.loads((tmp_path / "study.json").read_text())
    assert len(meta["y_slopes"]) == 1 and meta["y_slopes"][0]["slope"] < 0
    assert set(meta["versions"]) == {"fracext", "python", "numpy", "scipy"}
    assert "seeds" in meta and meta["failures"] == []


def test_config_roundtrip(tmp_path):
    assert run(tmp_path, "study", "--Nx", "4,8", "--M", "4,8", "--Y", "2", "--s", "1.3,1.6", "--K", "70") == 0
    meta = json.loads((tmp_path / "study.json").read_text())
    cfg = RunConfig.from_json(json.dumps(meta["config"]))
    assert cfg == RunConfig(
        s=(1.3, 1.6), Y=(2.0,), Nx=(4, 8), M=(4, 8), K=70, out=str(tmp_path)
    )
    assert RunConfig.from_json(cfg.to_json()) == cfg


def test_study_grid_order():
    cfg = RunConfig(s=(1.3, 1.6), Y=(2.0, 3.0), Nx=(8,), M=(4, 8))
    pts = study_points(cfg)
    assert len(pts) == 8
    assert [(p.s, p.Y, p.M) for p in pts[:4]] == [(1.3, 2.0, 4), (1.3, 2.0, 8), (1.3, 3.0, 4), (1.3, 3.0, 8)]
    assert len(study_points(RunConfig(Nx=(4, 8, 16), M=(4, 8)))) == 6


def test_study_determinism(tmp_path):
    args = ["study", "--Nx", "4,8", "--M", "4,8", "--Y", "2", "--s", "1.25,1.75"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b"), "--workers", "3"]) == 0

    def strip(path):
        return [r[:-1] for r in read_csv(path)]

    assert strip(tmp_path / "a" / "study.csv") == strip(tmp_path / "b" / "study.csv")
    assert main(args + ["--out", str(tmp_path / "c"), "--no-timing"]) == 0
    assert main(args + ["--out", str(tmp_path / "d"), "--no-timing"]) == 0
    assert (tmp_path / "c" / "study.csv").read_bytes() == (tmp_path / "d" / "study.csv").read_bytes()
