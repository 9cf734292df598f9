import json
import subprocess
import sys

import numpy as np
import pytest

from dbscanpp.cli import main
from dbscanpp.core import read_labels, write_labels
from dbscanpp.data import generate, read_ppm, write_csv, write_ppm


@pytest.fixture()
def labelled_csv(tmp_path):
    ds = generate("gauss2x2d", 400, 0)
    path = tmp_path / "in.csv"
    write_csv(path, ds.data, ds.truth)
    return path


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


class TestCluster:
    def test_dbscan_writes_labels_and_summary(self, labelled_csv, tmp_path, capsys):
        out = tmp_path / "labels.txt"
        code, stdout, _ = run(
            ["cluster", "--algo", "dbscan", "--eps", 1.0, "--min-pts", 10, labelled_csv,
             "--label-column", 2, "-o", out, "--report", tmp_path / "r.json", "--meta", tmp_path / "m.json"],
            capsys,
        )
        assert code == 0
        assert stdout.startswith("dbscan k=2 noise=")
        assert "elapsed_ms=" in stdout
        assert len(read_labels(out)) == 400
        report = json.loads((tmp_path / "r.json").read_text())
        assert report["ari"] > 0.9
        assert report["n_noise_dbscan"] is not None and report["n_noise_pp"] is None
        assert json.loads((tmp_path / "m.json").read_text())["has_truth"] is True

    def test_dbscanpp_noise_report(self, labelled_csv, tmp_path, capsys):
        code, stdout, _ = run(
            ["cluster", "--algo", "dbscanpp", "--strategy", "kcenter", "--m-ratio", 0.1, "--eps", 1.0,
             labelled_csv, "--label-column", 2, "-o", tmp_path / "l.txt", "--report", tmp_path / "r.json",
             "--noise-report"],
            capsys,
        )
        assert code == 0 and stdout.startswith("dbscanpp ")
        report = json.loads((tmp_path / "r.json").read_text())
        assert report["noise_subset"] is True
        assert report["n_noise_pp"] >= report["n_noise_dbscan"]

    def test_scores_absent_without_truth(self, tmp_path, capsys):
        path = tmp_path / "plain.csv"
        write_csv(path, generate("gauss2x2d", 50, 0).data)
        code, _, _ = run(["cluster", "--algo", "dbscan", "--eps", 1, path, "-o", tmp_path / "l.txt",
                          "--report", tmp_path / "r.json"], capsys)
        assert code == 0
        assert json.loads((tmp_path / "r.json").read_text())["ari"] is None

    def test_m_p_schedule(self, labelled_csv, tmp_path, capsys):
        code, _, _ = run(["cluster", "--eps", 1, "--m-p", 0.3, labelled_csv, "--label-column", 2,
                          "-o", tmp_path / "l.txt"], capsys)
        assert code == 0

    @pytest.mark.parametrize(
        "flags, needle",
        [
            (["--algo", "dbscan", "--eps", "-1"], "--eps"),
            (["--algo", "dbscan", "--eps", "abc"], "--eps"),
            (["--algo", "dbscan", "--eps", "1", "--min-pts", "0"], "--min-pts"),
            (["--eps", "1"], "--m"),
            (["--eps", "1", "--m", "5", "--m-ratio", "0.1"], "--m-ratio"),
            (["--eps", "1", "--m-ratio", "1.5"], "--m-ratio"),
            (["--algo", "dbscan", "--eps", "1", "--m", "5"], "--m"),
            (["--algo", "dbscan", "--eps", "1", "--eps-connect", "0.5"], "--eps-connect"),
            (["--algo", "dbscan", "--eps", "1", "--strategy", "random"], "--strategy"),
        ],
    )
    def test_bad_flags_exit_2(self, labelled_csv, flags, needle, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["cluster", *flags, str(labelled_csv)])
        assert exc.value.code == 2
        err = capsys.readouterr().err
        assert needle in err.splitlines()[-1]

    def test_missing_input_exit_1(self, tmp_path, capsys):
        code, _, err = run(["cluster", "--algo", "dbscan", "--eps", 1, tmp_path / "missing.csv"], capsys)
        assert code == 1 and "error" in err

    def test_m_above_n_exit_1(self, labelled_csv, capsys):
        code, _, err = run(["cluster", "--eps", 1, "--m", 10_000, labelled_csv], capsys)
        assert code == 1 and "--m" in err


class TestSegment:
    def test_solid_image_one_segment(self, tmp_path, capsys):
        write_ppm(tmp_path / "solid.ppm", np.full((6, 8, 3), 90, dtype=np.uint8))
        code, stdout, _ = run(["segment", "--algo", "dbscan", "--eps", 20, "--min-pts", 3,
                               tmp_path / "solid.ppm", "-o", tmp_path / "seg.ppm"], capsys)
        assert code == 0
        assert stdout.startswith("segments=1 ")
        assert read_ppm(tmp_path / "seg.ppm").shape == (6, 8, 3)

    def test_two_halves_dbscanpp(self, tmp_path, capsys):
        px = np.zeros((10, 10, 3), dtype=np.uint8)
        px[:, 5:] = 200
        write_ppm(tmp_path / "two.ppm", px)
        code, stdout, _ = run(["segment", "--eps", 3, "--min-pts", 5, "--m-ratio", 0.3,
                               tmp_path / "two.ppm", "-o", tmp_path / "seg.ppm",
                               "--labels", tmp_path / "l.txt"], capsys)
        assert code == 0
        assert read_labels(tmp_path / "l.txt").k == 2

    def test_non_ppm_exit_1(self, labelled_csv, tmp_path, capsys):
        code, _, err = run(["segment", "--algo", "dbscan", "--eps", 5, labelled_csv, "-o", tmp_path / "x.ppm"], capsys)
        assert code == 1 and "PPM" in err


class TestEval:
    def test_identical(self, tmp_path, capsys):
        write_labels([0, 0, 1, 1, -1], tmp_path / "a.txt")
        code, stdout, _ = run(["eval", tmp_path / "a.txt", tmp_path / "a.txt"], capsys)
        assert code == 0
        d = json.loads(stdout)
        assert d["ari"] == 1.0 and d["ami"] == pytest.approx(1.0)

    def test_permuted_ids_same_scores(self, tmp_path, capsys):
        write_labels([0, 0, 1, 2, 2, 1], tmp_path / "a.txt")
        write_labels([2, 2, 0, 1, 1, 0], tmp_path / "b.txt")
        write_labels([0, 1, 1, 2, 2, 0], tmp_path / "c.txt")
        _, ab, _ = run(["eval", tmp_path / "a.txt", tmp_path / "c.txt"], capsys)
        _, bc, _ = run(["eval", tmp_path / "b.txt", tmp_path / "c.txt"], capsys)
        assert json.loads(ab) == json.loads(bc)

    def test_length_mismatch_exit_1(self, tmp_path, capsys):
        write_labels([0, 0], tmp_path / "a.txt")
        write_labels([0, 0, 1], tmp_path / "b.txt")
        code, _, err = run(["eval", tmp_path / "a.txt", tmp_path / "b.txt"], capsys)
        assert code == 1 and "length" in err


class TestBench:
    def test_scaling(self, tmp_path, capsys):
        prefix = tmp_path / "sc"
        code, stdout, _ = run(["bench", "scaling", "--gen", "gauss4x3d", "--sizes", "1000,2000,4000",
                               "--out", prefix], capsys)
        assert code == 0
        assert "slopes" in json.loads(stdout)
        assert (tmp_path / "sc.csv").read_text().count("\n") == 10
        assert (tmp_path / "sc.jsonl").exists() and (tmp_path / "sc.plot.csv").exists()

    def test_eps_sweep(self, labelled_csv, tmp_path, capsys):
        code, stdout, _ = run(["bench", "eps-sweep", "--eps", "0.1:2.0:20", labelled_csv, "--label-column", 2,
                               "--out", tmp_path / "es"], capsys)
        assert code == 0
        assert (tmp_path / "es.csv").read_text().count("\n") == 61
        assert "robustness_width" in json.loads(stdout)

    def test_tradeoff(self, labelled_csv, tmp_path, capsys):
        code, stdout, _ = run(["bench", "tradeoff", "--ratios", "0.01,0.05,0.1,0.3,1.0", "--eps", 1.0,
                               labelled_csv, "--label-column", 2, "--out", tmp_path / "tr"], capsys)
        assert code == 0
        assert json.loads(stdout)["dbscan_noise"] >= 0

    def test_levelset(self, tmp_path, capsys):
        code, stdout, _ = run(["bench", "levelset", "--sizes", "300,600", "--seeds", "0,1",
                               "--resolution", 0.2, "--out", tmp_path / "ls"], capsys)
        assert code == 0
        assert set(json.loads(stdout)["median_hausdorff"]) == {"300", "600"}

    def test_needs_input(self, tmp_path, capsys):
        code, _, err = run(["bench", "tradeoff", "--ratios", "0.5", "--eps", 1, "--out", tmp_path / "x"], capsys)
        assert code == 1 and "--gen" in err

    def test_bad_grid_exit_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["bench", "eps-sweep", "--eps", "2:1", "--gen", "gauss2x2d"])
        assert exc.value.code == 2
        assert "--eps" in capsys.readouterr().err


@pytest.mark.parametrize("sub", ["cluster", "segment", "eval", "bench"])
def test_help_lists_flags(sub, capsys):
    with pytest.raises(SystemExit) as exc:
        main([sub, "--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    if sub in ("cluster", "segment"):
        assert "--min-pts" in out and "(default: 10)" in out and "--seed" in out


def test_module_entry_point(labelled_csv, tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "dbscanpp.cli", "eval", str(labelled_csv), str(labelled_csv)],
        capture_output=True, text=True,
    )
    # a CSV row is not an integer label: runtime error, not a flag error
    assert proc.returncode == 1
