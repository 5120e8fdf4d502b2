import json

import pytest

from barw.cli import main, read_config


def run(capsys, *argv):
    code = main(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def data_rows(text):
    return [l for l in text.splitlines() if l and not l.startswith("#")]


def test_spectrum_json(capsys):
    code, out, _ = run(capsys, "spectrum", "--n", "65", "--points")
    d = json.loads(out)
    assert code == 0
    assert d["nu_hat_4"] == {"num": 833, "den": 4225, "float": 833 / 4225}
    assert d["N"] == 16 and len(d["points"]) == 16
    assert d["meta"]["version"] == "0.1.0"


def test_validation_exit(capsys):
    assert run(capsys, "spectrum", "--n", "3")[0] == 2
    assert run(capsys, "corr", "--n", "5", "--ell", "0")[0] == 2
    assert run(capsys, "nodal", "--n", "5", "--trials", "1")[0] == 2
    assert run(capsys, "bogus")[0] == 2


def test_budget_exit(capsys):
    assert run(capsys, "corr", "--n", "32045", "--ell", "12", "--budget", "1000")[0] == 3


def test_corr_oracle(capsys):
    code, out, _ = run(capsys, "corr", "--n", "5", "--ell", "4", "--oracle")
    d = json.loads(out)
    assert code == 0 and d["count"] == d["oracle_count"] == 576
    assert "unordered_count" in d


def test_corr_oracle_mismatch(capsys, monkeypatch):
    import barw.cli as cli

    monkeypatch.setattr(cli, "brute_force_count", lambda *a, **k: -1)
    assert run(capsys, "corr", "--n", "5", "--ell", "2", "--oracle")[0] == 4


def test_compare_one_row_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["compare", "--n", "5", "--trials", "20", "--out", str(a)]) == 0
    assert main(["compare", "--n", "5", "--trials", "20", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    rows = data_rows(a.read_text())
    assert len(rows) == 2 and rows[0].startswith("n,N,nu_hat_4")
    assert json.loads((tmp_path / "a.csv.meta.json").read_text())["wall_time_s"] >= 0


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# near-semicorrelations\nn = 5\nell = 2\nK = 1\nstrict = true\n")
    code, out, _ = run(capsys, "corr", "--config", str(cfg))
    assert code == 0 and json.loads(out)["count"] == 16
    code, out, _ = run(capsys, "corr", "--config", str(cfg), "--K", "4")
    assert json.loads(out)["count"] == 48
    assert read_config(cfg)["strict"] == "true"
    bad = tmp_path / "bad.cfg"
    bad.write_text("nope = 1\n")
    assert run(capsys, "corr", "--config", str(bad), "--n", "5", "--ell", "2")[0] == 2


def test_kacrice_outputs(tmp_path, capsys):
    from PIL import Image

    from barw.field import read_grid

    png, grid = tmp_path / "k.png", tmp_path / "k.bin"
    code, out, _ = run(capsys, "kacrice", "--n", "65", "--heatmap", str(png), "--grid", str(grid),
                       "--image-resolution", "32")
    assert code == 0
    rows = data_rows(out)
    assert rows[0] == "name,value,paper_prediction,residual"
    assert len(rows) == 1 + 5 + 17
    assert Image.open(png).size == (32, 32)
    meta, vals = read_grid(grid)
    assert vals.shape == (32, 32) and meta["n"] == 65


def test_nodal_outputs(tmp_path, capsys):
    tcsv = tmp_path / "t.csv"
    code, out, _ = run(capsys, "nodal", "--n", "18", "--trials", "5", "--trials-csv", str(tcsv),
                       "--png-dir", str(tmp_path / "png"), "--png-count", "2")
    assert code == 0 and len(data_rows(out)) == 2
    assert len(list((tmp_path / "png").glob("*.png"))) == 2
    assert len(data_rows(tcsv.read_text())) == 6


def test_construct_density_sectors(capsys):
    code, out, _ = run(capsys, "construct", "--a", "0", "--tol", "0.1")
    assert code == 0 and abs(json.loads(out)["nu_hat_4"]["float"]) <= 0.1
    code, out, _ = run(capsys, "density", "--X", "10", "100")
    counts = [r.split(",")[:2] for r in data_rows(out)[1:]]
    assert counts == [["10", "7"], ["100", "43"]]
    code, out, _ = run(capsys, "sectors", "--theta1", "0", "--theta2", "1.5707963267948966", "--X", "30")
    assert data_rows(out)[1].split(",")[3] == "4"


@pytest.mark.parametrize("cmd", ["spectrum", "corr", "construct"])
def test_help(cmd, capsys):
    assert main([cmd, "--help"]) == 0
